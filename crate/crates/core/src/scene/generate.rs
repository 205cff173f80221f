//! Procedural multi-room houses on a 0.05 m grid.

use super::{footprint_at, Category, ObjectId, ObjectInstance, ObjectPose, ObjectState, Placement, Room, RoomLabel, Scene, SizeClass};
use crate::geom::{Cell, Heading, Rect};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::collections::VecDeque;

pub const MAX_ATTEMPTS: u32 = 1000;

const CELL_SIZE: f64 = 0.05;
const MIN_ROOM: i32 = 50;
const DOOR_WIDTH: i32 = 20;
/// Free margin kept around door openings.
const DOOR_CLEARANCE: i32 = 22;
/// Minimum gap between two pieces of furniture.
const FURNITURE_GAP: i32 = 10;
/// Lattice stride used for the navigability check (one Forward step).
const STRIDE: i32 = 5;

/// Generates a house; a pure function of `(seed, size_class)`.
///
/// Panics if no attempt satisfies the constraints within [`MAX_ATTEMPTS`], which
/// means the generator configuration itself is broken.
pub fn generate_scene(seed: u64, size_class: SizeClass) -> Scene {
    for attempt in 0..MAX_ATTEMPTS {
        let stream = seed.wrapping_mul(0x9E37_79B9_7F4A_7C15) ^ (attempt as u64) << 1 ^ size_class as u64;
        let mut rng = ChaCha8Rng::seed_from_u64(stream);
        if let Some(scene) = try_build(seed, size_class, &mut rng) {
            if check_constraints(&scene).is_ok() {
                return scene;
            }
        }
    }
    panic!("scene generator could not satisfy its constraints for seed {seed} ({size_class:?})");
}

/// The generator's own acceptance test for a finished scene.
pub fn check_constraints(scene: &Scene) -> Result<(), String> {
    scene.check_invariants()?;
    let (lo, hi) = scene.size_class.side_band();
    for side in [scene.width, scene.height] {
        let m = side as f64 * scene.cell_size;
        if !(m > lo + 1e-9 && m <= hi + 1e-9) {
            return Err(format!("side {m:.2} m outside ({lo}, {hi}]"));
        }
    }
    if scene.size_class == SizeClass::Large && scene.rooms.len() < 3 {
        return Err("large scenes need at least three rooms".into());
    }
    let kitchen = scene
        .rooms
        .iter()
        .find(|r| r.label == RoomLabel::Kitchen)
        .ok_or("no kitchen")?;
    let in_kitchen = |o: &ObjectInstance| {
        let mut cur = o;
        while let Some(p) = cur.parent_receptacle {
            cur = scene.object(p).expect("parent exists");
        }
        kitchen.rect.contains(cur.pose.cell)
    };
    let kitchen_objs: Vec<&ObjectInstance> = scene.objects.iter().filter(|o| in_kitchen(o)).collect();
    if !kitchen_objs.iter().any(|o| o.affordances.receptacle) {
        return Err("kitchen lacks a receptacle".into());
    }
    if !kitchen_objs.iter().any(|o| o.affordances.toggleable) {
        return Err("kitchen lacks an appliance".into());
    }
    if kitchen_objs.iter().filter(|o| o.category.is_food()).count() < 2 {
        return Err("kitchen needs two food items".into());
    }
    // every free cell reachable from every other
    let free: Vec<Cell> = (0..scene.height)
        .flat_map(|r| (0..scene.width).map(move |c| Cell::new(r, c)))
        .filter(|&c| scene.is_free(c))
        .collect();
    let start = *free.first().ok_or("no free cells")?;
    if flood_count(scene, start) != free.len() {
        return Err("free space is not connected".into());
    }
    // the motion lattice connects all rooms whatever the start residue
    for dr in 0..STRIDE {
        for dc in 0..STRIDE {
            let comp = lattice_components(scene, STRIDE, (dr, dc));
            let main = comp.main_label().ok_or("empty lattice")?;
            for room in &scene.rooms {
                let hit = room.rect.cells().any(|c| comp.label(c) == Some(main));
                if !hit {
                    return Err(format!("room {} unreachable on lattice residue ({dr},{dc})", room.id));
                }
            }
        }
    }
    Ok(())
}

fn flood_count(scene: &Scene, start: Cell) -> usize {
    let mut seen = vec![false; (scene.width * scene.height) as usize];
    let mut q = VecDeque::from([start]);
    seen[(start.row * scene.width + start.col) as usize] = true;
    let mut n = 0;
    while let Some(c) = q.pop_front() {
        n += 1;
        for (dr, dc) in [(0, 1), (1, 0), (0, -1), (-1, 0)] {
            let nb = c.offset(dr, dc);
            if scene.is_free(nb) {
                let i = (nb.row * scene.width + nb.col) as usize;
                if !seen[i] {
                    seen[i] = true;
                    q.push_back(nb);
                }
            }
        }
    }
    n
}

/// Connected components of the stride lattice `(r, c) ≡ residue (mod stride)`,
/// where two nodes are joined if every cell of the straight move between them is free.
pub struct LatticeComponents {
    stride: i32,
    residue: (i32, i32),
    rows: i32,
    cols: i32,
    labels: Vec<u32>,
    sizes: Vec<usize>,
}

impl LatticeComponents {
    fn node(&self, c: Cell) -> Option<usize> {
        let (r0, c0) = self.residue;
        if c.row < r0 || c.col < c0 || (c.row - r0) % self.stride != 0 || (c.col - c0) % self.stride != 0 {
            return None;
        }
        let (i, j) = ((c.row - r0) / self.stride, (c.col - c0) / self.stride);
        (i < self.rows && j < self.cols).then_some((i * self.cols + j) as usize)
    }

    /// Component label of a lattice cell (None for off-lattice or blocked cells).
    pub fn label(&self, c: Cell) -> Option<u32> {
        self.node(c).map(|n| self.labels[n]).filter(|&l| l != u32::MAX)
    }

    /// Label of the largest component.
    pub fn main_label(&self) -> Option<u32> {
        self.sizes
            .iter()
            .enumerate()
            .max_by_key(|(i, s)| (**s, std::cmp::Reverse(*i)))
            .map(|(i, _)| i as u32)
    }
}

pub fn lattice_components(scene: &Scene, stride: i32, residue: (i32, i32)) -> LatticeComponents {
    let (r0, c0) = residue;
    let rows = (scene.height - r0 + stride - 1) / stride;
    let cols = (scene.width - c0 + stride - 1) / stride;
    let mut lc = LatticeComponents {
        stride,
        residue,
        rows,
        cols,
        labels: vec![u32::MAX; (rows * cols).max(0) as usize],
        sizes: Vec::new(),
    };
    let to_cell = |i: i32, j: i32| Cell::new(r0 + i * stride, c0 + j * stride);
    let edge_free = |a: Cell, dr: i32, dc: i32| (1..=stride).all(|k| scene.is_free(a.offset(dr * k, dc * k)));
    for i in 0..rows {
        for j in 0..cols {
            let n = (i * cols + j) as usize;
            let cell = to_cell(i, j);
            if lc.labels[n] != u32::MAX || !scene.is_free(cell) {
                continue;
            }
            let label = lc.sizes.len() as u32;
            let mut size = 0;
            let mut q = VecDeque::from([(i, j)]);
            lc.labels[n] = label;
            while let Some((a, b)) = q.pop_front() {
                size += 1;
                let here = to_cell(a, b);
                for (dr, dc) in [(0, 1), (1, 0), (0, -1), (-1, 0)] {
                    let (na, nb) = (a + dr, b + dc);
                    if na < 0 || nb < 0 || na >= rows || nb >= cols {
                        continue;
                    }
                    let m = (na * cols + nb) as usize;
                    if lc.labels[m] == u32::MAX && edge_free(here, dr, dc) {
                        lc.labels[m] = label;
                        q.push_back((na, nb));
                    }
                }
            }
            lc.sizes.push(size);
        }
    }
    lc
}

struct Builder<'a> {
    rng: &'a mut ChaCha8Rng,
    objects: Vec<ObjectInstance>,
    doors: Vec<Rect>,
}

impl Builder<'_> {
    fn add(&mut self, category: Category, cell: Cell, facing: Heading, parent: Option<ObjectId>) -> ObjectId {
        let id = ObjectId(self.objects.len() as u32 + 1);
        self.objects.push(ObjectInstance {
            id,
            category,
            pose: ObjectPose { cell, facing },
            affordances: category.affordances(),
            state: ObjectState::default(),
            parent_receptacle: parent,
        });
        id
    }

    fn floor_rects(&self) -> Vec<Rect> {
        self.objects
            .iter()
            .filter(|o| o.category.info().placement == Placement::Floor)
            .map(|o| o.footprint())
            .collect()
    }

    /// Puts a floor item against a random wall of `room`.
    fn place_floor(&mut self, category: Category, room: &Rect) -> Option<ObjectId> {
        let existing = self.floor_rects();
        for _ in 0..60 {
            let facing = *Heading::ALL.choose(self.rng).expect("nonempty");
            let probe = footprint_at(category, Cell::new(0, 0), facing);
            let (h, w) = (probe.height(), probe.width());
            if h > room.height() || w > room.width() {
                continue;
            }
            // back against the wall opposite to the facing direction
            let cell = match facing {
                Heading::South => Cell::new(room.row0, self.rng.gen_range(room.col0..=room.col1 - w)),
                Heading::North => Cell::new(room.row1 - h, self.rng.gen_range(room.col0..=room.col1 - w)),
                Heading::East => Cell::new(self.rng.gen_range(room.row0..=room.row1 - h), room.col0),
                Heading::West => Cell::new(self.rng.gen_range(room.row0..=room.row1 - h), room.col1 - w),
            };
            let fp = footprint_at(category, cell, facing);
            if existing.iter().any(|e| e.expand(FURNITURE_GAP).intersects(&fp)) {
                continue;
            }
            if self.doors.iter().any(|d| d.expand(DOOR_CLEARANCE).intersects(&fp)) {
                continue;
            }
            // keep a walkable ring in front of the item
            let front = match facing {
                Heading::South => Rect::new(fp.row1, fp.col0, fp.row1 + 12, fp.col1),
                Heading::North => Rect::new(fp.row0 - 12, fp.col0, fp.row0, fp.col1),
                Heading::East => Rect::new(fp.row0, fp.col1, fp.row1, fp.col1 + 12),
                Heading::West => Rect::new(fp.row0, fp.col0 - 12, fp.row1, fp.col0),
            };
            if !(room.contains(Cell::new(front.row0, front.col0)) && room.contains(Cell::new(front.row1 - 1, front.col1 - 1))) {
                continue;
            }
            if existing.iter().any(|e| e.intersects(&front)) {
                continue;
            }
            return Some(self.add(category, cell, facing, None));
        }
        None
    }

    /// Puts a small item on (or inside) `parent` at a free spot of its surface.
    fn place_on(&mut self, category: Category, parent: ObjectId) -> Option<ObjectId> {
        let p = self.objects[(parent.0 - 1) as usize].clone();
        let surface = p.footprint();
        let facing = p.pose.facing;
        let probe = footprint_at(category, Cell::new(0, 0), facing);
        let (h, w) = (probe.height(), probe.width());
        if h > surface.height() || w > surface.width() {
            return None;
        }
        let taken: Vec<Rect> = self
            .objects
            .iter()
            .filter(|o| o.parent_receptacle == Some(parent))
            .map(|o| o.footprint().expand(1))
            .collect();
        for _ in 0..40 {
            let cell = Cell::new(
                self.rng.gen_range(surface.row0..=surface.row1 - h),
                self.rng.gen_range(surface.col0..=surface.col1 - w),
            );
            let fp = Rect::new(cell.row, cell.col, cell.row + h, cell.col + w);
            if taken.iter().any(|t| t.intersects(&fp)) {
                continue;
            }
            return Some(self.add(category, cell, facing, Some(parent)));
        }
        None
    }

    fn pick<'c>(&mut self, options: &'c [&'c str]) -> &'c str {
        options.choose(self.rng).expect("nonempty")
    }
}

fn c(name: &str) -> Category {
    Category::named(name)
}

fn try_build(seed: u64, size_class: SizeClass, rng: &mut ChaCha8Rng) -> Option<Scene> {
    let (lo, hi) = match size_class {
        SizeClass::Small => (120, 200),
        SizeClass::Large => (201, 320),
    };
    let width = rng.gen_range(lo..=hi);
    let height = rng.gen_range(lo..=hi);
    let target_rooms = match size_class {
        SizeClass::Small => rng.gen_range(2..=3),
        SizeClass::Large => rng.gen_range(3..=6),
    };

    let mut walls = vec![true; (width * height) as usize];
    let interior = Rect::new(1, 1, height - 1, width - 1);
    let mut rects = vec![interior];
    while rects.len() < target_rooms {
        // split the largest splittable rectangle along its long side
        let mut order: Vec<usize> = (0..rects.len()).collect();
        order.sort_by_key(|&i| std::cmp::Reverse(rects[i].area()));
        let Some(&i) = order.iter().find(|&&i| rects[i].height().max(rects[i].width()) > 2 * MIN_ROOM) else {
            break;
        };
        let r = rects.swap_remove(i);
        if r.height() > r.width() || (r.height() == r.width() && rng.gen_bool(0.5)) {
            let cut = rng.gen_range(r.row0 + MIN_ROOM..=r.row1 - MIN_ROOM - 1);
            rects.push(Rect::new(r.row0, r.col0, cut, r.col1));
            rects.push(Rect::new(cut + 1, r.col0, r.row1, r.col1));
        } else {
            let cut = rng.gen_range(r.col0 + MIN_ROOM..=r.col1 - MIN_ROOM - 1);
            rects.push(Rect::new(r.row0, r.col0, r.row1, cut));
            rects.push(Rect::new(r.row0, cut + 1, r.row1, r.col1));
        }
    }
    if rects.len() < 2 && size_class == SizeClass::Large {
        return None;
    }
    rects.sort_by_key(|r| (r.row0, r.col0));
    for r in &rects {
        for cell in r.cells() {
            walls[(cell.row * width + cell.col) as usize] = false;
        }
    }

    // doors on shared wall segments, spanning tree plus a few extra loops
    let mut candidates: Vec<(usize, usize, Rect)> = Vec::new();
    for i in 0..rects.len() {
        for j in 0..rects.len() {
            if i == j {
                continue;
            }
            let (a, b) = (rects[i], rects[j]);
            if a.row1 + 1 == b.row0 {
                let (lo, hi) = (a.col0.max(b.col0), a.col1.min(b.col1));
                if hi - lo >= DOOR_WIDTH + 10 {
                    let start = rng.gen_range(lo + 5..=hi - 5 - DOOR_WIDTH);
                    candidates.push((i, j, Rect::new(a.row1, start, a.row1 + 1, start + DOOR_WIDTH)));
                }
            }
            if a.col1 + 1 == b.col0 {
                let (lo, hi) = (a.row0.max(b.row0), a.row1.min(b.row1));
                if hi - lo >= DOOR_WIDTH + 10 {
                    let start = rng.gen_range(lo + 5..=hi - 5 - DOOR_WIDTH);
                    candidates.push((i, j, Rect::new(start, a.col1, start + DOOR_WIDTH, a.col1 + 1)));
                }
            }
        }
    }
    candidates.shuffle(rng);
    let mut comp: Vec<usize> = (0..rects.len()).collect();
    fn find(comp: &mut Vec<usize>, x: usize) -> usize {
        if comp[x] != x {
            let r = find(comp, comp[x]);
            comp[x] = r;
        }
        comp[x]
    }
    let mut doors = Vec::new();
    for (i, j, door) in candidates {
        let (a, b) = (find(&mut comp, i), find(&mut comp, j));
        if a != b || rng.gen_bool(0.25) {
            comp[a] = b;
            doors.push(door);
        }
    }
    let root = find(&mut comp, 0);
    if (0..rects.len()).any(|i| find(&mut comp, i) != root) {
        return None;
    }
    for d in &doors {
        for cell in d.cells() {
            walls[(cell.row * width + cell.col) as usize] = false;
        }
    }

    // kitchen is the largest room; the rest cycle through the other labels
    let mut by_area: Vec<usize> = (0..rects.len()).collect();
    by_area.sort_by_key(|&i| (std::cmp::Reverse(rects[i].area()), i));
    let mut labels = vec![RoomLabel::Kitchen; rects.len()];
    let mut others = [RoomLabel::LivingRoom, RoomLabel::Bedroom, RoomLabel::Bathroom];
    others.shuffle(rng);
    for (k, &i) in by_area.iter().enumerate().skip(1) {
        labels[i] = others[(k - 1) % 3];
    }
    let rooms: Vec<Room> = rects
        .iter()
        .enumerate()
        .map(|(i, r)| Room { id: i as u32, label: labels[i], rect: *r })
        .collect();

    let mut b = Builder { rng, objects: Vec::new(), doors };
    for room in &rooms {
        furnish(&mut b, room)?;
    }
    let objects = b.objects;
    let scene = Scene::new(seed, size_class, CELL_SIZE, width, height, rooms, objects, walls);
    Some(scene)
}

fn furnish(b: &mut Builder, room: &Room) -> Option<()> {
    let r = room.rect;
    match room.label {
        RoomLabel::Kitchen => {
            let fridge = b.place_floor(c("Fridge"), &r)?;
            let counter = b.place_floor(c("CounterTop"), &r)?;
            let sink = b.place_floor(c("Sink"), &r)?;
            let mut surfaces = vec![counter];
            let stove = if b.rng.gen_bool(0.7) { b.place_floor(c("Stove"), &r) } else { None };
            let cabinet = if b.rng.gen_bool(0.6) { b.place_floor(c("Cabinet"), &r) } else { None };
            if b.rng.gen_bool(0.5) {
                if let Some(t) = b.place_floor(c("DiningTable"), &r) {
                    surfaces.push(t);
                }
            }
            if b.rng.gen_bool(0.5) {
                if let Some(t) = b.place_floor(c("CounterTop"), &r) {
                    surfaces.push(t);
                }
            }
            if b.rng.gen_bool(0.4) {
                b.place_floor(c("GarbageCan"), &r);
            }
            b.place_on(c("Faucet"), sink)?;
            b.place_on(c("Microwave"), counter)?;
            let s = *surfaces.choose(b.rng).expect("nonempty");
            b.place_on(c("Knife"), s)?;
            for app in ["Toaster", "CoffeeMachine"] {
                if b.rng.gen_bool(0.5) {
                    let s = *surfaces.choose(b.rng).expect("nonempty");
                    b.place_on(c(app), s);
                }
            }
            let foods = ["Tomato", "Lettuce", "Potato", "Apple", "Egg", "Bread"];
            let mut placed = 0;
            for _ in 0..b.rng.gen_range(2..=4) {
                let f = c(b.pick(&foods));
                let s = *surfaces.choose(b.rng).expect("nonempty");
                if b.place_on(f, s).is_some() {
                    placed += 1;
                }
            }
            if placed < 2 {
                return None;
            }
            for _ in 0..b.rng.gen_range(1..=2) {
                let f = c(b.pick(&foods));
                b.place_on(f, fridge)?;
            }
            let ware = [
                "ButterKnife", "Mug", "Cup", "Bottle", "Bowl", "Plate", "Kettle", "Spatula", "Fork", "Spoon", "SaltShaker",
                "DishSponge",
            ];
            for _ in 0..b.rng.gen_range(3..=6) {
                let w = c(b.pick(&ware));
                let s = *surfaces.choose(b.rng).expect("nonempty");
                b.place_on(w, s);
            }
            if let Some(st) = stove {
                let cook = c(b.pick(&["Pan", "Pot"]));
                b.place_on(cook, st);
            }
            if let Some(cab) = cabinet {
                if b.rng.gen_bool(0.5) {
                    let w = c(b.pick(&["Bowl", "Plate", "Cup", "Mug"]));
                    b.place_on(w, cab);
                }
            }
        }
        RoomLabel::LivingRoom => {
            let sofa = b.place_floor(c("Sofa"), &r)?;
            let stand = b.place_floor(c("TVStand"), &r)?;
            b.place_on(c("Television"), stand)?;
            let mut surfaces = vec![sofa, stand];
            if let Some(t) = b.place_floor(c("CoffeeTable"), &r) {
                surfaces.push(t);
            }
            if b.rng.gen_bool(0.5) {
                b.place_floor(c("ArmChair"), &r);
            }
            if b.rng.gen_bool(0.6) {
                if let Some(l) = b.place_floor(c("FloorLamp"), &r) {
                    if b.rng.gen_bool(0.3) {
                        b.objects[(l.0 - 1) as usize].state.is_on = true;
                    }
                }
            }
            b.place_on(c("Pillow"), sofa);
            for _ in 0..b.rng.gen_range(2..=4) {
                let item = c(b.pick(&["RemoteControl", "Book", "Laptop", "Vase", "KeyChain"]));
                let s = *surfaces.choose(b.rng).expect("nonempty");
                b.place_on(item, s);
            }
        }
        RoomLabel::Bedroom => {
            let bed = b.place_floor(c("Bed"), &r)?;
            b.place_on(c("Pillow"), bed);
            let mut surfaces = vec![bed];
            if let Some(d) = b.place_floor(c("Desk"), &r) {
                b.place_on(c("DeskLamp"), d);
                surfaces.push(d);
            }
            if b.rng.gen_bool(0.6) {
                if let Some(d) = b.place_floor(c("Dresser"), &r) {
                    surfaces.push(d);
                }
            }
            for _ in 0..b.rng.gen_range(2..=4) {
                let item = c(b.pick(&["AlarmClock", "CellPhone", "Pencil", "CD", "Book", "Laptop"]));
                let s = *surfaces.choose(b.rng).expect("nonempty");
                b.place_on(item, s);
            }
        }
        RoomLabel::Bathroom => {
            b.place_floor(c("Toilet"), &r)?;
            if let Some(tub) = b.place_floor(c("Bathtub"), &r) {
                for _ in 0..b.rng.gen_range(1..=3) {
                    let item = c(b.pick(&["Towel", "SoapBar", "ToiletPaper", "SprayBottle", "Candle"]));
                    b.place_on(item, tub);
                }
            }
        }
    }
    Some(())
}
