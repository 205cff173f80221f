//! Fixed object taxonomy: names, affordances, sizes and room affinity.

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use std::fmt;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RoomLabel {
    Kitchen,
    Bedroom,
    #[serde(rename = "livingroom")]
    LivingRoom,
    Bathroom,
}

impl RoomLabel {
    pub const ALL: [RoomLabel; 4] = [RoomLabel::Kitchen, RoomLabel::Bedroom, RoomLabel::LivingRoom, RoomLabel::Bathroom];

    pub fn as_str(self) -> &'static str {
        match self {
            RoomLabel::Kitchen => "kitchen",
            RoomLabel::Bedroom => "bedroom",
            RoomLabel::LivingRoom => "livingroom",
            RoomLabel::Bathroom => "bathroom",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct Affordances {
    pub pickupable: bool,
    pub receptacle: bool,
    pub openable: bool,
    pub toggleable: bool,
    pub sliceable: bool,
}

const fn aff(pickupable: bool, receptacle: bool, openable: bool, toggleable: bool, sliceable: bool) -> Affordances {
    Affordances { pickupable, receptacle, openable, toggleable, sliceable }
}

const NONE: Affordances = aff(false, false, false, false, false);
const PICK: Affordances = aff(true, false, false, false, false);
const FOOD: Affordances = aff(true, false, false, false, true);
const RECEP: Affordances = aff(false, true, false, false, false);
const PICK_RECEP: Affordances = aff(true, true, false, false, false);
const CONTAINER: Affordances = aff(false, true, true, false, false);
const TOGGLE: Affordances = aff(false, false, false, true, false);

/// Where instances of a category are put by the scene generator.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Placement {
    Structure,
    /// Against a room wall, on the floor.
    Floor,
    /// On top of (or inside) a receptacle.
    Surface,
}

#[derive(Debug, Clone, Copy)]
pub struct CategoryInfo {
    pub name: &'static str,
    pub affordances: Affordances,
    /// Footprint in cells, `(depth, length)`; floor items put `depth` away from the wall.
    pub size: (i32, i32),
    /// Box height in meters.
    pub height: f64,
    /// Height above the base where contents rest. For openable containers this is
    /// also the shell left standing when the door is open.
    pub surface: f64,
    pub placement: Placement,
    pub room: Option<RoomLabel>,
}

macro_rules! cat {
    ($name:expr, $aff:expr, ($d:expr, $l:expr), $h:expr, $s:expr, $p:ident, $room:expr) => {
        CategoryInfo {
            name: $name,
            affordances: $aff,
            size: ($d, $l),
            height: $h,
            surface: $s,
            placement: Placement::$p,
            room: $room,
        }
    };
}

const K: Option<RoomLabel> = Some(RoomLabel::Kitchen);
const B: Option<RoomLabel> = Some(RoomLabel::Bedroom);
const L: Option<RoomLabel> = Some(RoomLabel::LivingRoom);
const T: Option<RoomLabel> = Some(RoomLabel::Bathroom);

/// Index 0 is reserved for background.
static TABLE: &[CategoryInfo] = &[
    cat!("Background", NONE, (0, 0), 0.0, 0.0, Structure, None),
    cat!("Wall", NONE, (1, 1), 2.5, 2.5, Structure, None),
    // kitchen furniture and appliances
    cat!("Fridge", CONTAINER, (16, 16), 1.8, 0.8, Floor, K),
    cat!("CounterTop", RECEP, (12, 40), 0.9, 0.9, Floor, K),
    cat!("Sink", RECEP, (12, 16), 0.85, 0.85, Floor, K),
    cat!("Stove", aff(false, true, false, true, false), (12, 14), 0.9, 0.9, Floor, K),
    cat!("Cabinet", CONTAINER, (10, 16), 0.9, 0.3, Floor, K),
    cat!("DiningTable", RECEP, (20, 28), 0.75, 0.75, Floor, K),
    cat!("GarbageCan", RECEP, (6, 6), 0.4, 0.4, Floor, K),
    cat!("Microwave", aff(false, true, true, true, false), (8, 10), 0.3, 0.05, Surface, K),
    cat!("Toaster", TOGGLE, (4, 6), 0.2, 0.2, Surface, K),
    cat!("CoffeeMachine", aff(false, true, false, true, false), (5, 5), 0.35, 0.35, Surface, K),
    cat!("Faucet", TOGGLE, (2, 2), 0.25, 0.25, Surface, K),
    // food
    cat!("Tomato", FOOD, (2, 2), 0.08, 0.08, Surface, K),
    cat!("Lettuce", FOOD, (3, 3), 0.15, 0.15, Surface, K),
    cat!("Potato", FOOD, (2, 2), 0.08, 0.08, Surface, K),
    cat!("Apple", FOOD, (2, 2), 0.09, 0.09, Surface, K),
    cat!("Egg", FOOD, (1, 2), 0.06, 0.06, Surface, K),
    cat!("Bread", FOOD, (3, 4), 0.12, 0.12, Surface, K),
    // kitchenware
    cat!("Knife", PICK, (1, 4), 0.03, 0.03, Surface, K),
    cat!("ButterKnife", PICK, (1, 4), 0.03, 0.03, Surface, K),
    cat!("Mug", PICK, (2, 2), 0.11, 0.11, Surface, K),
    cat!("Cup", PICK, (2, 2), 0.12, 0.12, Surface, K),
    cat!("Bottle", PICK, (2, 2), 0.25, 0.25, Surface, K),
    cat!("Bowl", PICK_RECEP, (3, 3), 0.08, 0.08, Surface, K),
    cat!("Plate", PICK_RECEP, (4, 4), 0.03, 0.03, Surface, K),
    cat!("Pan", PICK_RECEP, (5, 5), 0.08, 0.08, Surface, K),
    cat!("Pot", PICK_RECEP, (5, 5), 0.15, 0.15, Surface, K),
    cat!("Kettle", PICK, (3, 3), 0.2, 0.2, Surface, K),
    cat!("Spatula", PICK, (1, 5), 0.03, 0.03, Surface, K),
    cat!("Fork", PICK, (1, 4), 0.02, 0.02, Surface, K),
    cat!("Spoon", PICK, (1, 4), 0.02, 0.02, Surface, K),
    cat!("SaltShaker", PICK, (1, 1), 0.1, 0.1, Surface, K),
    cat!("DishSponge", PICK, (2, 2), 0.04, 0.04, Surface, K),
    // living room
    cat!("Sofa", RECEP, (18, 40), 0.45, 0.45, Floor, L),
    cat!("ArmChair", RECEP, (16, 16), 0.45, 0.45, Floor, L),
    cat!("CoffeeTable", RECEP, (12, 20), 0.45, 0.45, Floor, L),
    cat!("TVStand", RECEP, (10, 30), 0.6, 0.6, Floor, L),
    cat!("Television", TOGGLE, (2, 20), 0.6, 0.6, Surface, L),
    cat!("FloorLamp", TOGGLE, (6, 6), 1.6, 1.6, Floor, L),
    cat!("RemoteControl", PICK, (1, 3), 0.03, 0.03, Surface, L),
    cat!("Book", aff(true, false, true, false, false), (3, 4), 0.05, 0.05, Surface, L),
    cat!("Laptop", aff(true, false, true, true, false), (5, 7), 0.03, 0.03, Surface, L),
    cat!("Pillow", PICK, (6, 8), 0.12, 0.12, Surface, L),
    cat!("Vase", PICK, (2, 2), 0.3, 0.3, Surface, L),
    cat!("KeyChain", PICK, (1, 1), 0.02, 0.02, Surface, L),
    // bedroom
    cat!("Bed", RECEP, (40, 32), 0.6, 0.6, Floor, B),
    cat!("Dresser", RECEP, (10, 24), 0.9, 0.9, Floor, B),
    cat!("Desk", RECEP, (14, 24), 0.75, 0.75, Floor, B),
    cat!("DeskLamp", TOGGLE, (3, 3), 0.45, 0.45, Surface, B),
    cat!("AlarmClock", PICK, (2, 3), 0.1, 0.1, Surface, B),
    cat!("CellPhone", aff(true, false, false, true, false), (1, 2), 0.02, 0.02, Surface, B),
    cat!("Pencil", PICK, (1, 3), 0.01, 0.01, Surface, B),
    cat!("CD", PICK, (2, 2), 0.01, 0.01, Surface, B),
    // bathroom
    cat!("Toilet", CONTAINER, (14, 10), 0.45, 0.4, Floor, T),
    cat!("Bathtub", RECEP, (16, 34), 0.55, 0.55, Floor, T),
    cat!("Towel", PICK, (2, 6), 0.05, 0.05, Surface, T),
    cat!("SoapBar", PICK, (1, 2), 0.04, 0.04, Surface, T),
    cat!("ToiletPaper", PICK, (2, 2), 0.1, 0.1, Surface, T),
    cat!("SprayBottle", PICK, (2, 2), 0.25, 0.25, Surface, T),
    cat!("Candle", aff(true, false, false, true, false), (1, 1), 0.1, 0.1, Surface, T),
];

/// Object category; an index into the fixed taxonomy. Serialized by name.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Category(u16);

impl Category {
    pub const BACKGROUND: Category = Category(0);
    pub const WALL: Category = Category(1);

    /// Every category except background.
    pub fn all() -> impl Iterator<Item = Category> {
        (1..TABLE.len() as u16).map(Category)
    }

    /// Categories that can appear in tasks (everything but background and walls).
    pub fn objects() -> impl Iterator<Item = Category> {
        (2..TABLE.len() as u16).map(Category)
    }

    pub fn count() -> usize {
        TABLE.len() - 1
    }

    pub fn from_id(id: u16) -> Option<Category> {
        ((id as usize) < TABLE.len()).then_some(Category(id))
    }

    pub fn from_name(name: &str) -> Option<Category> {
        TABLE.iter().position(|c| c.name.eq_ignore_ascii_case(name)).map(|i| Category(i as u16))
    }

    /// Panicking lookup for names known at compile time.
    pub fn named(name: &str) -> Category {
        Self::from_name(name).unwrap_or_else(|| panic!("unknown category {name}"))
    }

    pub fn id(self) -> u16 {
        self.0
    }

    pub fn info(self) -> &'static CategoryInfo {
        &TABLE[self.0 as usize]
    }

    pub fn name(self) -> &'static str {
        self.info().name
    }

    pub fn affordances(self) -> Affordances {
        self.info().affordances
    }

    /// Lower-case words used in natural-language text, e.g. "counter top".
    pub fn phrase(self) -> String {
        let mut out = String::new();
        for (i, ch) in self.name().chars().enumerate() {
            if ch.is_uppercase() && i > 0 {
                let prev_upper = self.name().as_bytes()[i - 1].is_ascii_uppercase();
                if !prev_upper {
                    out.push(' ');
                }
            }
            out.push(ch.to_ascii_lowercase());
        }
        match out.as_str() {
            "t v stand" | "tvstand" => "tv stand".into(),
            "c d" => "cd".into(),
            _ => out,
        }
    }

    pub fn is_food(self) -> bool {
        self.affordances().sliceable
    }
}

impl fmt::Debug for Category {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl fmt::Display for Category {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl Serialize for Category {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(self.name())
    }
}

impl<'de> Deserialize<'de> for Category {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let name = String::deserialize(d)?;
        Category::from_name(&name).ok_or_else(|| serde::de::Error::custom(format!("unknown category `{name}`")))
    }
}
