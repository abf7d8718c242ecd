//! Rectangular rooms, image sources and image-source tracking.
//!
//! Rooms are axis-aligned rectangles `[0, W] x [0, H]` described by four
//! walls. Image sources are produced by breadth-first mirroring of the true
//! source across the walls and are deduplicated by position.

use std::collections::HashMap;
use std::fmt;
use std::ops::{Add, AddAssign, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Positions closer than this are considered the same image (metres).
pub const DEDUP_TOLERANCE: f64 = 1e-9;

const NORMAL_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GeometryError {
    #[error("invalid wall: {0}")]
    InvalidWall(String),
    #[error("invalid room: {0}")]
    InvalidRoom(String),
    #[error("source at {0} is not strictly inside the room")]
    SourceOutsideRoom(Vec2),
    #[error("translation moves the source to {0}, outside the room")]
    TranslationLeavesRoom(Vec2),
}

/// A point or displacement in the plane.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Vec2 {
    pub x: f64,
    pub y: f64,
}

impl Vec2 {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn dot(self, other: Vec2) -> f64 {
        self.x * other.x + self.y * other.y
    }

    pub fn norm(self) -> f64 {
        self.x.hypot(self.y)
    }

    pub fn distance(self, other: Vec2) -> f64 {
        (self - other).norm()
    }

    pub fn from_polar(radius: f64, angle: f64) -> Self {
        Self::new(radius * angle.cos(), radius * angle.sin())
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }
}

impl fmt::Display for Vec2 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.x, self.y)
    }
}

impl From<[f64; 2]> for Vec2 {
    fn from(v: [f64; 2]) -> Self {
        Self::new(v[0], v[1])
    }
}

impl From<Vec2> for [f64; 2] {
    fn from(v: Vec2) -> Self {
        [v.x, v.y]
    }
}

impl Add for Vec2 {
    type Output = Vec2;
    fn add(self, rhs: Vec2) -> Vec2 {
        Vec2::new(self.x + rhs.x, self.y + rhs.y)
    }
}

impl AddAssign for Vec2 {
    fn add_assign(&mut self, rhs: Vec2) {
        self.x += rhs.x;
        self.y += rhs.y;
    }
}

impl Sub for Vec2 {
    type Output = Vec2;
    fn sub(self, rhs: Vec2) -> Vec2 {
        Vec2::new(self.x - rhs.x, self.y - rhs.y)
    }
}

impl Mul<f64> for Vec2 {
    type Output = Vec2;
    fn mul(self, rhs: f64) -> Vec2 {
        Vec2::new(self.x * rhs, self.y * rhs)
    }
}

impl Neg for Vec2 {
    type Output = Vec2;
    fn neg(self) -> Vec2 {
        Vec2::new(-self.x, -self.y)
    }
}

/// Coordinate axis a wall is perpendicular to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Axis {
    X,
    Y,
}

/// A flat reflector: any point on it, its outward unit normal and its
/// (frequency-flat) reflectivity.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Wall {
    anchor: Vec2,
    normal: Vec2,
    reflectivity: f64,
}

impl Wall {
    pub fn new(anchor: Vec2, normal: Vec2, reflectivity: f64) -> Result<Self, GeometryError> {
        if !anchor.is_finite() || !normal.is_finite() {
            return Err(GeometryError::InvalidWall("non-finite coordinates".into()));
        }
        if (normal.norm() - 1.0).abs() > NORMAL_TOLERANCE {
            return Err(GeometryError::InvalidWall(format!(
                "normal {normal} does not have unit length"
            )));
        }
        if !(0.0..=1.0).contains(&reflectivity) {
            return Err(GeometryError::InvalidWall(format!(
                "reflectivity {reflectivity} outside [0, 1]"
            )));
        }
        Ok(Self {
            anchor,
            normal,
            reflectivity,
        })
    }

    pub fn anchor(&self) -> Vec2 {
        self.anchor
    }

    pub fn normal(&self) -> Vec2 {
        self.normal
    }

    pub fn reflectivity(&self) -> f64 {
        self.reflectivity
    }

    /// The axis the wall is perpendicular to, if it is axis aligned.
    pub fn axis(&self) -> Option<Axis> {
        if self.normal.y.abs() <= NORMAL_TOLERANCE {
            Some(Axis::X)
        } else if self.normal.x.abs() <= NORMAL_TOLERANCE {
            Some(Axis::Y)
        } else {
            None
        }
    }
}

/// Mirror `p` across the line carrying `wall`.
pub fn reflect_point(p: Vec2, wall: &Wall) -> Vec2 {
    p + wall.normal * (2.0 * (wall.anchor - p).dot(wall.normal))
}

/// Axis-aligned rectangular room `[0, width] x [0, height]`.
///
/// Walls are stored in the order x = 0, x = W, y = 0, y = H.
#[derive(Debug, Clone, PartialEq)]
pub struct Room {
    walls: [Wall; 4],
    width: f64,
    height: f64,
}

impl Room {
    /// Rectangle with the same reflectivity on every wall.
    pub fn rectangle(width: f64, height: f64, reflectivity: f64) -> Result<Self, GeometryError> {
        Self::with_reflectivities(width, height, [reflectivity; 4])
    }

    /// Rectangle with per-wall reflectivities ordered x = 0, x = W, y = 0, y = H.
    pub fn with_reflectivities(
        width: f64,
        height: f64,
        reflectivities: [f64; 4],
    ) -> Result<Self, GeometryError> {
        if !(width.is_finite() && width > 0.0 && height.is_finite() && height > 0.0) {
            return Err(GeometryError::InvalidRoom(format!(
                "dimensions must be positive, got {width} x {height}"
            )));
        }
        let walls = [
            Wall::new(Vec2::new(0.0, 0.0), Vec2::new(-1.0, 0.0), reflectivities[0])?,
            Wall::new(Vec2::new(width, 0.0), Vec2::new(1.0, 0.0), reflectivities[1])?,
            Wall::new(Vec2::new(0.0, 0.0), Vec2::new(0.0, -1.0), reflectivities[2])?,
            Wall::new(Vec2::new(0.0, height), Vec2::new(0.0, 1.0), reflectivities[3])?,
        ];
        Ok(Self {
            walls,
            width,
            height,
        })
    }

    pub fn walls(&self) -> &[Wall; 4] {
        &self.walls
    }

    pub fn width(&self) -> f64 {
        self.width
    }

    pub fn height(&self) -> f64 {
        self.height
    }

    pub fn contains_strictly(&self, p: Vec2) -> bool {
        self.contains_with_margin(p, 0.0)
    }

    /// True when `p` is inside the room and more than `margin` from every wall.
    pub fn contains_with_margin(&self, p: Vec2, margin: f64) -> bool {
        p.x > margin && p.x < self.width - margin && p.y > margin && p.y < self.height - margin
    }
}

/// A true or image source.
#[derive(Debug, Clone, PartialEq)]
pub struct ImageSource {
    pub position: Vec2,
    /// Number of reflections; 0 for the true source.
    pub generation: usize,
    /// Product of the wall reflectivities along `walls`.
    pub attenuation: f64,
    /// How many times the x and the y coordinate were mirrored.
    pub mirror_counts: [u32; 2],
    /// Indices into [`Room::walls`] of the reflection sequence, first reflection first.
    pub walls: Vec<usize>,
}

impl ImageSource {
    fn origin(position: Vec2) -> Self {
        Self {
            position,
            generation: 0,
            attenuation: 1.0,
            mirror_counts: [0, 0],
            walls: Vec::new(),
        }
    }

    /// Whether x and y were each mirrored an odd number of times.
    pub fn parity(&self) -> (bool, bool) {
        (self.mirror_counts[0] % 2 == 1, self.mirror_counts[1] % 2 == 1)
    }

    /// Diagonal of the matrix mapping a source displacement onto this image.
    pub fn displacement_signs(&self) -> Vec2 {
        let (px, py) = self.parity();
        Vec2::new(if px { -1.0 } else { 1.0 }, if py { -1.0 } else { 1.0 })
    }

    fn reflected(&self, wall_index: usize, wall: &Wall) -> Self {
        let mut mirror_counts = self.mirror_counts;
        match wall.axis() {
            Some(Axis::X) => mirror_counts[0] += 1,
            Some(Axis::Y) => mirror_counts[1] += 1,
            None => unreachable!("rooms only hold axis-aligned walls"),
        }
        let mut walls = self.walls.clone();
        walls.push(wall_index);
        Self {
            position: reflect_point(self.position, wall),
            generation: self.generation + 1,
            attenuation: self.attenuation * wall.reflectivity(),
            mirror_counts,
            walls,
        }
    }
}

/// The true source and its distinct images up to `max_order`, images sorted
/// by generation then position.
#[derive(Debug, Clone)]
pub struct ImageSourceSet {
    room: Room,
    max_order: usize,
    source: ImageSource,
    images: Vec<ImageSource>,
}

impl ImageSourceSet {
    pub fn source(&self) -> &ImageSource {
        &self.source
    }

    pub fn images(&self) -> &[ImageSource] {
        &self.images
    }

    pub fn room(&self) -> &Room {
        &self.room
    }

    pub fn max_order(&self) -> usize {
        self.max_order
    }

    /// Total count including the true source.
    pub fn len(&self) -> usize {
        self.images.len() + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Entry `k`: 0 is the true source, then the images in sorted order.
    pub fn get(&self, k: usize) -> Option<&ImageSource> {
        if k == 0 {
            Some(&self.source)
        } else {
            self.images.get(k - 1)
        }
    }

    /// True source first, then images.
    pub fn iter(&self) -> impl Iterator<Item = &ImageSource> {
        std::iter::once(&self.source).chain(self.images.iter())
    }

    /// The first `count` entries (true source first).
    pub fn first(&self, count: usize) -> impl Iterator<Item = &ImageSource> {
        self.iter().take(count)
    }

    /// Move every entry according to a displacement `translation` of the true
    /// source. Valid for right-angle rooms only, which [`Room`] guarantees.
    pub fn track(&self, translation: Vec2) -> Result<ImageSourceSet, GeometryError> {
        let moved = self.source.position + translation;
        if !self.room.contains_strictly(moved) {
            return Err(GeometryError::TranslationLeavesRoom(moved));
        }
        let shift = |img: &ImageSource| {
            let signs = img.displacement_signs();
            let mut out = img.clone();
            out.position += Vec2::new(signs.x * translation.x, signs.y * translation.y);
            out
        };
        let mut images: Vec<ImageSource> = self.images.iter().map(shift).collect();
        sort_images(&mut images);
        Ok(ImageSourceSet {
            room: self.room.clone(),
            max_order: self.max_order,
            source: shift(&self.source),
            images,
        })
    }
}

pub fn track_images(set: &ImageSourceSet, translation: Vec2) -> Result<ImageSourceSet, GeometryError> {
    set.track(translation)
}

fn sort_images(images: &mut [ImageSource]) {
    images.sort_by(|a, b| {
        a.generation
            .cmp(&b.generation)
            .then(a.position.x.total_cmp(&b.position.x))
            .then(a.position.y.total_cmp(&b.position.y))
    });
}

/// Spatial hash used to deduplicate coincident images.
struct PositionIndex {
    cells: HashMap<(i64, i64), Vec<Vec2>>,
}

impl PositionIndex {
    fn new() -> Self {
        Self {
            cells: HashMap::new(),
        }
    }

    fn key(p: Vec2) -> (i64, i64) {
        (
            (p.x / DEDUP_TOLERANCE).floor() as i64,
            (p.y / DEDUP_TOLERANCE).floor() as i64,
        )
    }

    /// Inserts `p` unless an existing point lies within the tolerance.
    fn insert(&mut self, p: Vec2) -> bool {
        let (kx, ky) = Self::key(p);
        for dx in -1..=1 {
            for dy in -1..=1 {
                if let Some(bucket) = self.cells.get(&(kx + dx, ky + dy)) {
                    if bucket.iter().any(|q| q.distance(p) <= DEDUP_TOLERANCE) {
                        return false;
                    }
                }
            }
        }
        self.cells.entry((kx, ky)).or_default().push(p);
        true
    }
}

/// All distinct sources reachable from `source` with at most `max_order`
/// wall reflections.
///
/// Expansion is breadth first in wall order and never reflects back across
/// the wall that produced an image. When two sequences land on the same
/// point, the one found first (shortest, then lowest wall indices) is kept, so
/// the stored reflection sequence does not depend on where the source is.
pub fn enumerate_images(
    room: &Room,
    source: Vec2,
    max_order: usize,
) -> Result<ImageSourceSet, GeometryError> {
    if !room.contains_strictly(source) {
        return Err(GeometryError::SourceOutsideRoom(source));
    }
    let origin = ImageSource::origin(source);
    let mut index = PositionIndex::new();
    index.insert(source);

    let mut images = Vec::new();
    let mut frontier = vec![origin.clone()];
    for _ in 0..max_order {
        let mut next = Vec::new();
        for parent in &frontier {
            for (w, wall) in room.walls().iter().enumerate() {
                if parent.walls.last() == Some(&w) {
                    continue;
                }
                let child = parent.reflected(w, wall);
                if index.insert(child.position) {
                    next.push(child);
                }
            }
        }
        if next.is_empty() {
            break;
        }
        images.extend(next.iter().cloned());
        frontier = next;
    }
    sort_images(&mut images);
    Ok(ImageSourceSet {
        room: room.clone(),
        max_order,
        source: origin,
        images,
    })
}
