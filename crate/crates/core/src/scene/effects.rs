use super::{footprint_at, ObjectId, Scene};
use crate::geom::{Cell, Rect};
use serde::{Deserialize, Serialize};
use std::fmt;
use thiserror::Error;

/// Object-interaction primitives. Navigation is handled by the agent, not the scene.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ActionPrimitive {
    PickUp,
    Place,
    Open,
    Close,
    ToggleOn,
    ToggleOff,
    Slice,
}

impl ActionPrimitive {
    pub const ALL: [ActionPrimitive; 7] = [
        ActionPrimitive::PickUp,
        ActionPrimitive::Place,
        ActionPrimitive::Open,
        ActionPrimitive::Close,
        ActionPrimitive::ToggleOn,
        ActionPrimitive::ToggleOff,
        ActionPrimitive::Slice,
    ];
}

impl fmt::Display for ActionPrimitive {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error, Serialize, Deserialize)]
#[error("{primitive} on {target} violates a precondition: {reason}")]
pub struct PreconditionViolated {
    pub primitive: ActionPrimitive,
    pub target: ObjectId,
    pub reason: String,
}

/// Applies one primitive to `target` and returns the successor scene.
///
/// Only the target (and, for `PickUp`/`Place`, the held object) changes.
pub fn apply_effect(
    scene: &Scene,
    primitive: ActionPrimitive,
    target: ObjectId,
    held: Option<ObjectId>,
) -> Result<Scene, PreconditionViolated> {
    let fail = |reason: &str| PreconditionViolated { primitive, target, reason: reason.to_string() };
    let obj = scene.object(target).ok_or_else(|| fail("no such object"))?;
    if held != scene.held() {
        return Err(fail("held object does not match the scene"));
    }
    let a = obj.affordances;
    let st = obj.state;
    if primitive != ActionPrimitive::Place && st.is_held {
        return Err(fail("target is held"));
    }
    let mut next = scene.clone();
    match primitive {
        ActionPrimitive::PickUp => {
            if !a.pickupable {
                return Err(fail("target is not pickupable"));
            }
            if held.is_some() {
                return Err(fail("already holding an object"));
            }
            if scene.hidden_by(target).is_some() {
                return Err(fail("target is inside a closed container"));
            }
            if scene.contents(target).next().is_some() {
                return Err(fail("target has contents"));
            }
            next.containment.remove(&target);
            let o = next.object_mut(target).expect("target exists");
            o.parent_receptacle = None;
            o.state.is_held = true;
        }
        ActionPrimitive::Place => {
            let h = held.ok_or_else(|| fail("nothing held"))?;
            if !a.receptacle {
                return Err(fail("target is not a receptacle"));
            }
            if h == target {
                return Err(fail("cannot place an object into itself"));
            }
            if a.openable && !st.is_open {
                return Err(fail("receptacle is closed"));
            }
            if scene.hidden_by(target).is_some() {
                return Err(fail("receptacle is inside a closed container"));
            }
            let slot = place_slot(scene, target, h);
            next.containment.insert(h, target);
            let o = next.object_mut(h).expect("held exists");
            o.parent_receptacle = Some(target);
            o.state.is_held = false;
            o.pose.cell = slot;
        }
        ActionPrimitive::Open | ActionPrimitive::Close => {
            let opening = primitive == ActionPrimitive::Open;
            if !a.openable {
                return Err(fail("target is not openable"));
            }
            if st.is_open == opening {
                return Err(fail(if opening { "already open" } else { "already closed" }));
            }
            if opening && a.toggleable && st.is_on {
                return Err(fail("cannot open while switched on"));
            }
            next.object_mut(target).expect("target exists").state.is_open = opening;
        }
        ActionPrimitive::ToggleOn | ActionPrimitive::ToggleOff => {
            let on = primitive == ActionPrimitive::ToggleOn;
            if !a.toggleable {
                return Err(fail("target is not toggleable"));
            }
            if st.is_on == on {
                return Err(fail(if on { "already on" } else { "already off" }));
            }
            if on && a.openable && a.receptacle && st.is_open {
                return Err(fail("must be closed before switching on"));
            }
            next.object_mut(target).expect("target exists").state.is_on = on;
        }
        ActionPrimitive::Slice => {
            if !a.sliceable {
                return Err(fail("target is not sliceable"));
            }
            if st.is_sliced {
                return Err(fail("already sliced"));
            }
            let knife = held.and_then(|h| scene.object(h)).map(|o| o.category.name() == "Knife");
            if knife != Some(true) {
                return Err(fail("slicing requires a held knife"));
            }
            next.object_mut(target).expect("target exists").state.is_sliced = true;
        }
    }
    Ok(next)
}

/// Top-left cell for `item` on `receptacle`: the free spot closest to the surface center.
fn place_slot(scene: &Scene, receptacle: ObjectId, item: ObjectId) -> Cell {
    let r = scene.object(receptacle).expect("receptacle exists");
    let it = scene.object(item).expect("item exists");
    let surface = r.footprint();
    let probe = footprint_at(it.category, Cell::new(0, 0), it.pose.facing);
    let (h, w) = (probe.height(), probe.width());
    let occupied: Vec<Rect> = scene
        .contents(receptacle)
        .filter(|&c| c != item)
        .filter_map(|c| scene.object(c))
        .map(|o| o.footprint())
        .collect();
    let center = surface.center();
    let mut best: Option<(i64, Cell)> = None;
    for row in surface.row0..=(surface.row1 - h).max(surface.row0) {
        for col in surface.col0..=(surface.col1 - w).max(surface.col0) {
            let fp = Rect::new(row, col, row + h, col + w);
            if occupied.iter().any(|o| o.intersects(&fp)) {
                continue;
            }
            let d = (fp.center().manhattan(center)) as i64;
            let cand = (d, Cell::new(row, col));
            if best.is_none_or(|b| cand < b) {
                best = Some(cand);
            }
        }
    }
    best.map(|b| b.1).unwrap_or(Cell::new(surface.row0, surface.col0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scene::{generate_scene, Category, SizeClass};

    fn first(scene: &Scene, name: &str) -> ObjectId {
        scene.instances_of(Category::named(name)).next().unwrap_or_else(|| panic!("no {name}")).id
    }

    fn kitchen_scene() -> Scene {
        generate_scene(7, SizeClass::Small)
    }

    fn pick(scene: &Scene, id: ObjectId) -> Scene {
        apply_effect(scene, ActionPrimitive::PickUp, id, None).unwrap()
    }

    #[test]
    fn slice_with_knife() {
        let s = kitchen_scene();
        let knife = first(&s, "Knife");
        let food = s.objects.iter().find(|o| o.category.is_food() && s.hidden_by(o.id).is_none()).unwrap().id;
        let s2 = pick(&s, knife);
        let s3 = apply_effect(&s2, ActionPrimitive::Slice, food, Some(knife)).unwrap();
        assert!(s3.object(food).unwrap().state.is_sliced);
        // sliced objects stay sliced
        assert!(apply_effect(&s3, ActionPrimitive::Slice, food, Some(knife)).is_err());
    }

    #[test]
    fn slice_without_knife_fails() {
        let s = kitchen_scene();
        let food = s.objects.iter().find(|o| o.category.is_food()).unwrap().id;
        let e = apply_effect(&s, ActionPrimitive::Slice, food, None).unwrap_err();
        assert!(e.reason.contains("knife"));
    }

    #[test]
    fn second_pickup_violates_single_hold() {
        let s = kitchen_scene();
        let knife = first(&s, "Knife");
        let s2 = pick(&s, knife);
        let other = s2
            .objects
            .iter()
            .find(|o| o.affordances.pickupable && o.id != knife && s2.hidden_by(o.id).is_none())
            .unwrap()
            .id;
        let e = apply_effect(&s2, ActionPrimitive::PickUp, other, Some(knife)).unwrap_err();
        assert_eq!(e.primitive, ActionPrimitive::PickUp);
        assert!(e.reason.contains("already holding"));
    }

    #[test]
    fn opening_fridge_reveals_contents() {
        let s = kitchen_scene();
        let fridge = first(&s, "Fridge");
        let inside: Vec<_> = s.contents(fridge).collect();
        assert!(!inside.is_empty(), "generator keeps food in the fridge");
        assert!(inside.iter().all(|&i| !s.is_rendered(i)));
        let s2 = apply_effect(&s, ActionPrimitive::Open, fridge, None).unwrap();
        assert!(s2.object(fridge).unwrap().state.is_open);
        assert!(inside.iter().all(|&i| s2.is_rendered(i)));
    }

    #[test]
    fn only_target_changes() {
        let s = kitchen_scene();
        let fridge = first(&s, "Fridge");
        let s2 = apply_effect(&s, ActionPrimitive::Open, fridge, None).unwrap();
        for (a, b) in s.objects.iter().zip(&s2.objects) {
            if a.id != fridge {
                assert_eq!(a, b);
            }
        }
    }

    #[test]
    fn place_sets_containment() {
        let s = kitchen_scene();
        let knife = first(&s, "Knife");
        let sink = first(&s, "Sink");
        let s2 = pick(&s, knife);
        assert!(s2.containment.get(&knife).is_none());
        let s3 = apply_effect(&s2, ActionPrimitive::Place, sink, Some(knife)).unwrap();
        assert_eq!(s3.containment.get(&knife), Some(&sink));
        assert!(!s3.object(knife).unwrap().state.is_held);
        assert!(s3.object(sink).unwrap().footprint().contains(s3.object(knife).unwrap().pose.cell));
        s3.check_invariants().unwrap();
    }

    #[test]
    fn toggle_rules() {
        let s = kitchen_scene();
        let faucet = first(&s, "Faucet");
        let on = apply_effect(&s, ActionPrimitive::ToggleOn, faucet, None).unwrap();
        let e = apply_effect(&on, ActionPrimitive::ToggleOn, faucet, None).unwrap_err();
        assert_eq!(e.reason, "already on");
        let mw = first(&s, "Microwave");
        let open = apply_effect(&s, ActionPrimitive::Open, mw, None).unwrap();
        assert!(apply_effect(&open, ActionPrimitive::ToggleOn, mw, None).is_err());
    }

    #[test]
    fn held_argument_must_match() {
        let s = kitchen_scene();
        let knife = first(&s, "Knife");
        let fridge = first(&s, "Fridge");
        assert!(apply_effect(&s, ActionPrimitive::Open, fridge, Some(knife)).is_err());
    }
}
