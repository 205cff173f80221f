//! Instruction templates, role tables and instruction parsing.

use crate::scene::{Category, Predicate};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::sync::OnceLock;

/// One subgoal of an instruction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "intent", rename_all = "snake_case")]
pub enum Intent {
    Slice { item: Category },
    Place { item: Category, receptacle: Category },
    Heat { item: Category },
    TurnOn { item: Category },
    Open { item: Category },
    Bring { item: Category },
}

impl Intent {
    pub fn kind(&self) -> &'static str {
        match self {
            Intent::Slice { .. } => "slice",
            Intent::Place { .. } => "place",
            Intent::Heat { .. } => "heat",
            Intent::TurnOn { .. } => "turn_on",
            Intent::Open { .. } => "open",
            Intent::Bring { .. } => "bring",
        }
    }

    pub fn item(&self) -> Category {
        match *self {
            Intent::Slice { item }
            | Intent::Place { item, .. }
            | Intent::Heat { item }
            | Intent::TurnOn { item }
            | Intent::Open { item }
            | Intent::Bring { item } => item,
        }
    }

    pub fn categories(&self) -> Vec<Category> {
        let mut v = vec![self.item()];
        match self {
            Intent::Place { receptacle, .. } => v.push(*receptacle),
            Intent::Heat { .. } => v.push(Category::named("Microwave")),
            Intent::Slice { .. } => v.push(Category::named("Knife")),
            _ => {}
        }
        v
    }

    pub fn predicate(&self) -> Predicate {
        match *self {
            Intent::Slice { item } => Predicate::Sliced(item),
            Intent::Place { item, receptacle } => Predicate::In(item, receptacle),
            Intent::Heat { item } => Predicate::Heated(item),
            Intent::TurnOn { item } => Predicate::On(item),
            Intent::Open { item } => Predicate::Open(item),
            Intent::Bring { item } => Predicate::Held(item),
        }
    }

    /// The intent with every occurrence of `from` replaced by `to`.
    pub fn substitute(&self, from: Category, to: Category) -> Intent {
        let s = |c: Category| if c == from { to } else { c };
        match *self {
            Intent::Slice { item } => Intent::Slice { item: s(item) },
            Intent::Place { item, receptacle } => Intent::Place { item: s(item), receptacle: s(receptacle) },
            Intent::Heat { item } => Intent::Heat { item: s(item) },
            Intent::TurnOn { item } => Intent::TurnOn { item: s(item) },
            Intent::Open { item } => Intent::Open { item: s(item) },
            Intent::Bring { item } => Intent::Bring { item: s(item) },
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ShortTemplate {
    pub intent: String,
    pub text: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AbstractTemplate {
    pub text: String,
    /// Alternative readings, in order of preference.
    pub options: Vec<Vec<Intent>>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TemplateSet {
    pub short: Vec<ShortTemplate>,
    pub roles: BTreeMap<String, Vec<Category>>,
    pub surfaces: Vec<Category>,
    pub long_joiner: String,
    #[serde(rename = "abstract")]
    pub abstracts: Vec<AbstractTemplate>,
    /// Closed containers and the categories that may be stored inside them.
    pub containers: BTreeMap<Category, Vec<Category>>,
}

impl TemplateSet {
    pub fn builtin() -> &'static TemplateSet {
        static SET: OnceLock<TemplateSet> = OnceLock::new();
        SET.get_or_init(|| serde_json::from_str(include_str!("../../data/templates.json")).expect("bundled templates parse"))
    }

    pub fn from_json(text: &str) -> Result<TemplateSet, serde_json::Error> {
        serde_json::from_str(text)
    }

    pub fn role(&self, name: &str) -> &[Category] {
        self.roles.get(name).map(|v| v.as_slice()).unwrap_or(&[])
    }

    /// Candidate intents for a template kind, given the categories present.
    pub fn fill(&self, kind: &str, present: &dyn Fn(Category) -> bool) -> Vec<Intent> {
        let pick = |role: &str| self.role(role).iter().copied().filter(|&c| present(c)).collect::<Vec<_>>();
        match kind {
            "slice" => pick("slice").into_iter().map(|item| Intent::Slice { item }).collect(),
            "heat" => pick("heat").into_iter().map(|item| Intent::Heat { item }).collect(),
            "turn_on" => pick("turn_on").into_iter().map(|item| Intent::TurnOn { item }).collect(),
            "open" => pick("open").into_iter().map(|item| Intent::Open { item }).collect(),
            "bring" => pick("bring").into_iter().map(|item| Intent::Bring { item }).collect(),
            "place" => {
                let mut out = Vec::new();
                for item in pick("place_item") {
                    for receptacle in pick("place_receptacle") {
                        if item != receptacle {
                            out.push(Intent::Place { item, receptacle });
                        }
                    }
                }
                out
            }
            _ => Vec::new(),
        }
    }

    fn preposition(&self, receptacle: Category) -> &'static str {
        if self.surfaces.contains(&receptacle) {
            "on"
        } else {
            "in"
        }
    }

    /// Instruction text for one intent using a template of the same kind.
    pub fn render(&self, template: &ShortTemplate, intent: &Intent) -> String {
        let mut text = template.text.replace("{item}", &intent.item().phrase());
        if let Intent::Place { receptacle, .. } = intent {
            text = text.replace("{receptacle}", &receptacle.phrase());
            let (want, other) = match self.preposition(*receptacle) {
                "on" => (" on the ", " in the "),
                _ => (" in the ", " on the "),
            };
            text = text.replacen(other, want, 1);
        }
        text
    }

    /// Joined instruction for a chain of subgoals.
    pub fn join(&self, parts: &[String]) -> String {
        let mut out = String::new();
        for (i, p) in parts.iter().enumerate() {
            if i == 0 {
                out.push_str(p);
            } else {
                out.push_str(&self.long_joiner);
                out.push_str(&lowercase_first(p));
            }
        }
        out
    }

    /// Step body for putting `item` into or onto `receptacle`.
    pub fn put_text(&self, item: Category, receptacle: Category) -> String {
        format!("Put the {} {} the {}", item.phrase(), self.preposition(receptacle), receptacle.phrase())
    }

    /// Readings of an instruction: a chain of intents, or the options of an abstract template.
    pub fn parse(&self, instruction: &str) -> Option<Vec<Vec<Intent>>> {
        let norm = instruction.trim().trim_end_matches('.');
        if let Some(a) = self.abstracts.iter().find(|a| a.text.eq_ignore_ascii_case(norm)) {
            return Some(a.options.clone());
        }
        let mut chain = Vec::new();
        for part in norm.split(self.long_joiner.as_str()) {
            chain.push(self.parse_short(part)?);
        }
        Some(vec![chain])
    }

    fn parse_short(&self, text: &str) -> Option<Intent> {
        let text = text.to_lowercase();
        for t in &self.short {
            let mut pattern = regex::escape(&t.text.to_lowercase());
            pattern = pattern.replace(r"\{item\}", "(?P<item>[a-z ]+?)").replace(r"\{receptacle\}", "(?P<rec>[a-z ]+?)");
            pattern = pattern.replace(" in the ", " (?:in|on) the ").replace(" on the ", " (?:in|on) the ");
            let re = regex::Regex::new(&format!("^{pattern}$")).expect("template regex");
            let Some(caps) = re.captures(&text) else { continue };
            let item = caps.name("item").and_then(|m| category_by_phrase(m.as_str()))?;
            let intent = match t.intent.as_str() {
                "slice" => Intent::Slice { item },
                "heat" => Intent::Heat { item },
                "turn_on" => Intent::TurnOn { item },
                "open" => Intent::Open { item },
                "bring" => Intent::Bring { item },
                "place" => Intent::Place { item, receptacle: caps.name("rec").and_then(|m| category_by_phrase(m.as_str()))? },
                _ => return None,
            };
            return Some(intent);
        }
        None
    }
}

pub fn category_by_phrase(phrase: &str) -> Option<Category> {
    Category::objects().find(|c| c.phrase() == phrase.trim())
}

fn lowercase_first(s: &str) -> String {
    let mut c = s.chars();
    match c.next() {
        Some(f) => f.to_lowercase().collect::<String>() + c.as_str(),
        None => String::new(),
    }
}

/// Whether `text` contains any category phrase as a whole word sequence.
pub fn mentions_category(text: &str) -> Option<Category> {
    let words: Vec<String> = text
        .split(|ch: char| !ch.is_ascii_alphanumeric())
        .filter(|w| !w.is_empty())
        .map(|w| w.to_lowercase())
        .collect();
    let joined = format!(" {} ", words.join(" "));
    Category::all().skip(1).find(|c| {
        let p = c.phrase();
        joined.contains(&format!(" {p} ")) || joined.contains(&format!(" {p}s ")) || joined.contains(&format!(" {} ", p.replace(' ', "")))
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bundled_templates_load_and_abstracts_are_clean() {
        let t = TemplateSet::builtin();
        assert!(!t.short.is_empty());
        for a in &t.abstracts {
            assert_eq!(mentions_category(&a.text), None, "{}", a.text);
            assert!(!a.options.is_empty());
        }
        for c in t.roles.values().flatten() {
            assert!(c.id() > 1);
        }
    }

    #[test]
    fn render_then_parse_round_trips() {
        let t = TemplateSet::builtin();
        let all = |_c: Category| true;
        for tpl in &t.short {
            for intent in t.fill(&tpl.intent, &all) {
                let text = t.render(tpl, &intent);
                assert_eq!(t.parse(&text), Some(vec![vec![intent]]), "{text}");
            }
        }
    }

    #[test]
    fn chains_parse() {
        let t = TemplateSet::builtin();
        let a = Intent::Slice { item: Category::named("Tomato") };
        let b = Intent::Place { item: Category::named("Apple"), receptacle: Category::named("Fridge") };
        let text = t.join(&[t.render(&t.short[0], &a), t.render(&t.short[2], &b)]);
        assert_eq!(text, "Slice the tomato, then put the apple in the fridge");
        assert_eq!(t.parse(&text), Some(vec![vec![a, b]]));
    }

    #[test]
    fn mention_check_is_whole_word() {
        assert_eq!(mentions_category("Bring me the cup"), Some(Category::named("Cup")));
        assert_eq!(mentions_category("Toast something"), None);
        assert_eq!(mentions_category("Put it on the counter top"), Some(Category::named("CounterTop")));
    }
}
