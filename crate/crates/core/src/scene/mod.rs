//! World model: house layout, interactive objects and their containment graph.
//!
//! A [`Scene`] is an immutable snapshot. [`apply_effect`] is the only way to
//! change object state and returns a fresh snapshot.

mod effects;
mod generate;
mod goal;
pub mod rle;
pub mod taxonomy;

pub use effects::{apply_effect, ActionPrimitive, PreconditionViolated};
pub use generate::{check_constraints, generate_scene, lattice_components, LatticeComponents, MAX_ATTEMPTS};
pub use goal::{goal_satisfied, GoalCondition, GoalParseError, Predicate};
pub use taxonomy::{Affordances, Category, CategoryInfo, Placement, RoomLabel};

use crate::geom::{Cell, Heading, Rect};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::fmt;
use std::sync::{Arc, OnceLock};
use thiserror::Error;

pub const SCHEMA_VERSION: u32 = 1;

/// Instance id used for wall pixels in observations.
pub const WALL_INSTANCE: u32 = u32::MAX;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ObjectId(pub u32);

impl fmt::Display for ObjectId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "#{}", self.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SizeClass {
    Small,
    Large,
}

impl SizeClass {
    /// Allowed house side length band in meters, `(exclusive low, inclusive high)`.
    pub fn side_band(self) -> (f64, f64) {
        match self {
            SizeClass::Small => (0.0, 10.0),
            SizeClass::Large => (10.0, 16.0),
        }
    }
}

impl std::str::FromStr for SizeClass {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "small" => Ok(SizeClass::Small),
            "large" => Ok(SizeClass::Large),
            other => Err(format!("size class must be `small` or `large`, got `{other}`")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Room {
    pub id: u32,
    pub label: RoomLabel,
    pub rect: Rect,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct ObjectState {
    pub is_open: bool,
    pub is_on: bool,
    pub is_sliced: bool,
    pub is_held: bool,
}

/// Top-left footprint cell plus the direction the object's front faces.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ObjectPose {
    pub cell: Cell,
    pub facing: Heading,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ObjectInstance {
    pub id: ObjectId,
    pub category: Category,
    pub pose: ObjectPose,
    pub affordances: Affordances,
    pub state: ObjectState,
    pub parent_receptacle: Option<ObjectId>,
}

impl ObjectInstance {
    pub fn footprint(&self) -> Rect {
        footprint_at(self.category, self.pose.cell, self.pose.facing)
    }
}

/// Footprint of a category placed with top-left `cell` facing `facing`.
pub fn footprint_at(category: Category, cell: Cell, facing: Heading) -> Rect {
    let (depth, length) = category.info().size;
    let (h, w) = match facing {
        Heading::North | Heading::South => (depth, length),
        Heading::East | Heading::West => (length, depth),
    };
    Rect::new(cell.row, cell.col, cell.row + h, cell.col + w)
}

/// Vertical extent of something drawn in one cell.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RenderBox {
    pub z0: f64,
    pub z1: f64,
    pub instance: u32,
    pub category: Category,
}

/// Compressed per-cell box lists.
#[derive(Debug)]
pub struct BoxGrid {
    width: i32,
    height: i32,
    offsets: Vec<u32>,
    boxes: Vec<RenderBox>,
}

impl BoxGrid {
    pub fn at(&self, c: Cell) -> &[RenderBox] {
        if c.row < 0 || c.col < 0 || c.row >= self.height || c.col >= self.width {
            return &[];
        }
        let i = (c.row * self.width + c.col) as usize;
        &self.boxes[self.offsets[i] as usize..self.offsets[i + 1] as usize]
    }
}

/// Derived lookup structures; rebuilt lazily, never serialized or compared.
#[derive(Default)]
struct Derived {
    boxes: OnceLock<Arc<BoxGrid>>,
    blocked: OnceLock<Arc<Vec<bool>>>,
}

impl Clone for Derived {
    fn clone(&self) -> Self {
        Derived::default()
    }
}

impl PartialEq for Derived {
    fn eq(&self, _: &Self) -> bool {
        true
    }
}

impl fmt::Debug for Derived {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("Derived")
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Scene {
    pub seed: u64,
    pub size_class: SizeClass,
    pub cell_size: f64,
    pub width: i32,
    pub height: i32,
    pub rooms: Vec<Room>,
    pub objects: Vec<ObjectInstance>,
    pub containment: BTreeMap<ObjectId, ObjectId>,
    /// Row-major, `height * width`.
    pub walls: Vec<bool>,
    derived: Derived,
}

#[derive(Debug, Error)]
pub enum SceneError {
    #[error("malformed scene file: {0}")]
    Parse(#[from] serde_json::Error),
    #[error("unsupported scene schema version {0}")]
    Version(u32),
    #[error("bad wall grid: {0}")]
    Walls(#[from] rle::RleError),
    #[error("scene invariant violated: {0}")]
    Invariant(String),
}

#[derive(Serialize, Deserialize)]
struct SceneFile {
    schema_version: u32,
    seed: u64,
    size_class: SizeClass,
    cell_size: f64,
    width: i32,
    height: i32,
    rooms: Vec<Room>,
    objects: Vec<ObjectInstance>,
    containment: BTreeMap<ObjectId, ObjectId>,
    walls: String,
}

impl Scene {
    pub fn new(
        seed: u64,
        size_class: SizeClass,
        cell_size: f64,
        width: i32,
        height: i32,
        rooms: Vec<Room>,
        objects: Vec<ObjectInstance>,
        walls: Vec<bool>,
    ) -> Self {
        let containment = objects
            .iter()
            .filter_map(|o| o.parent_receptacle.map(|p| (o.id, p)))
            .collect();
        Scene {
            seed,
            size_class,
            cell_size,
            width,
            height,
            rooms,
            objects,
            containment,
            walls,
            derived: Derived::default(),
        }
    }

    pub fn to_json(&self) -> String {
        let file = SceneFile {
            schema_version: SCHEMA_VERSION,
            seed: self.seed,
            size_class: self.size_class,
            cell_size: self.cell_size,
            width: self.width,
            height: self.height,
            rooms: self.rooms.clone(),
            objects: self.objects.clone(),
            containment: self.containment.clone(),
            walls: rle::encode(&self.walls),
        };
        serde_json::to_string(&file).expect("scene serializes")
    }

    pub fn from_json(text: &str) -> Result<Scene, SceneError> {
        let file: SceneFile = serde_json::from_str(text)?;
        if file.schema_version != SCHEMA_VERSION {
            return Err(SceneError::Version(file.schema_version));
        }
        let walls = rle::decode(&file.walls, (file.width * file.height) as usize)?;
        let scene = Scene {
            seed: file.seed,
            size_class: file.size_class,
            cell_size: file.cell_size,
            width: file.width,
            height: file.height,
            rooms: file.rooms,
            objects: file.objects,
            containment: file.containment,
            walls,
            derived: Derived::default(),
        };
        scene.check_invariants().map_err(SceneError::Invariant)?;
        Ok(scene)
    }

    pub fn in_bounds(&self, c: Cell) -> bool {
        c.row >= 0 && c.col >= 0 && c.row < self.height && c.col < self.width
    }

    fn idx(&self, c: Cell) -> usize {
        (c.row * self.width + c.col) as usize
    }

    pub fn is_wall(&self, c: Cell) -> bool {
        !self.in_bounds(c) || self.walls[self.idx(c)]
    }

    /// Walls and floor-standing furniture block motion.
    pub fn is_blocked(&self, c: Cell) -> bool {
        if !self.in_bounds(c) {
            return true;
        }
        let grid = self.derived.blocked.get_or_init(|| Arc::new(self.build_blocked()));
        grid[self.idx(c)]
    }

    pub fn is_free(&self, c: Cell) -> bool {
        !self.is_blocked(c)
    }

    fn build_blocked(&self) -> Vec<bool> {
        let mut grid = self.walls.clone();
        for o in &self.objects {
            if o.category.info().placement == Placement::Floor {
                for c in o.footprint().cells() {
                    if self.in_bounds(c) {
                        let i = self.idx(c);
                        grid[i] = true;
                    }
                }
            }
        }
        grid
    }

    pub fn room_of(&self, c: Cell) -> Option<&Room> {
        self.rooms.iter().find(|r| r.rect.contains(c))
    }

    pub fn object(&self, id: ObjectId) -> Option<&ObjectInstance> {
        // ids are dense and start at 1
        self.objects
            .get((id.0 as usize).wrapping_sub(1))
            .filter(|o| o.id == id)
            .or_else(|| self.objects.iter().find(|o| o.id == id))
    }

    pub(crate) fn object_mut(&mut self, id: ObjectId) -> Option<&mut ObjectInstance> {
        self.derived = Derived::default();
        self.objects.iter_mut().find(|o| o.id == id)
    }

    pub fn instances_of(&self, category: Category) -> impl Iterator<Item = &ObjectInstance> {
        self.objects.iter().filter(move |o| o.category == category)
    }

    pub fn has_category(&self, category: Category) -> bool {
        self.instances_of(category).next().is_some()
    }

    pub fn held(&self) -> Option<ObjectId> {
        self.objects.iter().find(|o| o.state.is_held).map(|o| o.id)
    }

    pub fn contents(&self, container: ObjectId) -> impl Iterator<Item = ObjectId> + '_ {
        self.containment.iter().filter(move |(_, p)| **p == container).map(|(c, _)| *c)
    }

    /// Closed openable ancestor hiding `id`, if any.
    pub fn hidden_by(&self, id: ObjectId) -> Option<ObjectId> {
        let mut cur = self.containment.get(&id).copied();
        let mut guard = 0;
        while let Some(p) = cur {
            let po = self.object(p)?;
            if po.affordances.openable && po.affordances.receptacle && !po.state.is_open {
                return Some(p);
            }
            cur = self.containment.get(&p).copied();
            guard += 1;
            if guard > self.objects.len() {
                break;
            }
        }
        None
    }

    /// Whether the object is drawn at all: not held and not inside a closed container.
    pub fn is_rendered(&self, id: ObjectId) -> bool {
        match self.object(id) {
            Some(o) => !o.state.is_held && self.hidden_by(id).is_none(),
            None => false,
        }
    }

    /// Height of the object's base above the floor.
    pub fn base_height(&self, id: ObjectId) -> f64 {
        let mut z = 0.0;
        let mut cur = self.containment.get(&id).copied();
        while let Some(p) = cur {
            let Some(po) = self.object(p) else { break };
            z += po.category.info().surface;
            cur = self.containment.get(&p).copied();
        }
        z
    }

    /// Object boxes drawn in each cell (walls excluded).
    pub fn render_boxes(&self) -> Arc<BoxGrid> {
        self.derived.boxes.get_or_init(|| Arc::new(self.build_boxes())).clone()
    }

    fn build_boxes(&self) -> BoxGrid {
        let mut map: BTreeMap<usize, Vec<RenderBox>> = BTreeMap::new();
        for o in &self.objects {
            if !self.is_rendered(o.id) {
                continue;
            }
            let info = o.category.info();
            let z0 = self.base_height(o.id);
            let top = if o.affordances.openable && o.affordances.receptacle && o.state.is_open {
                info.surface
            } else {
                info.height
            };
            let b = RenderBox { z0, z1: z0 + top, instance: o.id.0, category: o.category };
            for c in o.footprint().cells() {
                if self.in_bounds(c) {
                    map.entry(self.idx(c)).or_default().push(b);
                }
            }
        }
        let n = (self.width * self.height) as usize;
        let mut offsets = vec![0u32; n + 1];
        let mut boxes = Vec::new();
        let mut next = 0;
        for (&i, list) in &map {
            for k in next..=i {
                offsets[k] = boxes.len() as u32;
            }
            boxes.extend_from_slice(list);
            next = i + 1;
        }
        for k in next..=n {
            offsets[k] = boxes.len() as u32;
        }
        BoxGrid { width: self.width, height: self.height, offsets, boxes }
    }

    /// Structural invariants that every valid scene satisfies.
    pub fn check_invariants(&self) -> Result<(), String> {
        if self.walls.len() != (self.width * self.height) as usize {
            return Err("wall grid size mismatch".into());
        }
        for (i, o) in self.objects.iter().enumerate() {
            if o.id.0 as usize != i + 1 {
                return Err(format!("object ids must be dense from 1, found {} at {i}", o.id));
            }
            if o.affordances != o.category.affordances() {
                return Err(format!("{} affordances differ from its category", o.id));
            }
            let a = o.affordances;
            let s = o.state;
            if (s.is_open && !a.openable) || (s.is_on && !a.toggleable) || (s.is_sliced && !a.sliceable) || (s.is_held && !a.pickupable)
            {
                return Err(format!("{} has a state flag without the matching affordance", o.id));
            }
            if self.containment.get(&o.id).copied() != o.parent_receptacle {
                return Err(format!("{} parent disagrees with containment map", o.id));
            }
            if let Some(p) = o.parent_receptacle {
                match self.object(p) {
                    Some(po) if po.affordances.receptacle => {}
                    _ => return Err(format!("{} contained in a non-receptacle", o.id)),
                }
            }
            if o.state.is_held && o.parent_receptacle.is_some() {
                return Err(format!("{} is held and contained", o.id));
            }
            if !o.state.is_held && o.parent_receptacle.is_none() {
                // on the floor: inside exactly one room
                let fp = o.footprint();
                let rooms = self
                    .rooms
                    .iter()
                    .filter(|r| r.rect.contains(Cell::new(fp.row0, fp.col0)) && r.rect.contains(Cell::new(fp.row1 - 1, fp.col1 - 1)))
                    .count();
                if rooms != 1 {
                    return Err(format!("{} footprint not inside exactly one room", o.id));
                }
            }
        }
        if self.objects.iter().filter(|o| o.state.is_held).count() > 1 {
            return Err("more than one object held".into());
        }
        for &child in self.containment.keys() {
            let mut seen = 0;
            let mut cur = self.containment.get(&child).copied();
            while let Some(p) = cur {
                if p == child || seen > self.objects.len() {
                    return Err(format!("containment cycle through {child}"));
                }
                seen += 1;
                cur = self.containment.get(&p).copied();
            }
        }
        for (i, a) in self.rooms.iter().enumerate() {
            for b in &self.rooms[i + 1..] {
                if a.rect.intersects(&b.rect) {
                    return Err(format!("rooms {} and {} overlap", a.id, b.id));
                }
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn footprint_rotates_with_facing() {
        let c = Category::named("CounterTop");
        assert_eq!(footprint_at(c, Cell::new(0, 0), Heading::South), Rect::new(0, 0, 12, 40));
        assert_eq!(footprint_at(c, Cell::new(0, 0), Heading::East), Rect::new(0, 0, 40, 12));
    }

    #[test]
    fn json_round_trip_is_stable() {
        let scene = generate_scene(3, SizeClass::Small);
        let a = scene.to_json();
        let back = Scene::from_json(&a).unwrap();
        assert_eq!(back, scene);
        assert_eq!(back.to_json(), a);
    }

    #[test]
    fn rejects_other_schema_versions() {
        let scene = generate_scene(3, SizeClass::Small);
        let text = scene.to_json().replacen("\"schema_version\":1", "\"schema_version\":7", 1);
        assert!(matches!(Scene::from_json(&text), Err(SceneError::Version(7))));
    }
}
