//! Primitive-shape scenes and free-space membership queries.

pub mod distance;

use std::collections::BTreeMap;
use std::path::Path;
use std::sync::Arc;

use nalgebra::{Isometry3, Vector3};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kinematics::{Capsule, Pose, PoseDoc, RobotModel};

use distance::{point_segment_distance, segment_aabb_distance, segment_segment_distance};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Shape {
    Box { half_extents: Vector3<f64> },
    Sphere { radius: f64 },
}

/// Axis-aligned bounding box in world frame.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Aabb {
    pub min: Vector3<f64>,
    pub max: Vector3<f64>,
}

impl Aabb {
    pub fn overlaps(&self, other: &Aabb) -> bool {
        (0..3).all(|i| self.min[i] <= other.max[i] && other.min[i] <= self.max[i])
    }

    pub fn union(&self, other: &Aabb) -> Aabb {
        Aabb {
            min: self.min.inf(&other.min),
            max: self.max.sup(&other.max),
        }
    }

    pub fn inflate(&self, margin: f64) -> Aabb {
        let m = Vector3::repeat(margin);
        Aabb {
            min: self.min - m,
            max: self.max + m,
        }
    }

    fn of_capsule(c: &Capsule) -> Aabb {
        let r = Vector3::repeat(c.radius);
        Aabb {
            min: c.a.coords.inf(&c.b.coords) - r,
            max: c.a.coords.sup(&c.b.coords) + r,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SceneObject {
    pub name: String,
    pub shape: Shape,
    pub pose: Pose,
    aabb: Aabb,
}

impl SceneObject {
    pub fn new(name: impl Into<String>, shape: Shape, pose: Pose) -> Result<Self> {
        let name = name.into();
        let positive = match shape {
            Shape::Box { half_extents } => half_extents.iter().all(|&h| h > 0.0 && h.is_finite()),
            Shape::Sphere { radius } => radius > 0.0 && radius.is_finite(),
        };
        if !positive {
            return Err(Error::Validation(format!(
                "object `{name}` needs positive extents"
            )));
        }
        let aabb = match shape {
            Shape::Sphere { radius } => Aabb {
                min: pose.position - Vector3::repeat(radius),
                max: pose.position + Vector3::repeat(radius),
            },
            Shape::Box { half_extents } => {
                let rot = pose.orientation.to_rotation_matrix();
                let extent = rot.matrix().abs() * half_extents;
                Aabb {
                    min: pose.position - extent,
                    max: pose.position + extent,
                }
            }
        };
        Ok(Self {
            name,
            shape,
            pose,
            aabb,
        })
    }

    pub fn aabb(&self) -> &Aabb {
        &self.aabb
    }

    /// Whether a world-frame capsule touches this object.
    pub fn intersects_capsule(&self, c: &Capsule) -> bool {
        match self.shape {
            Shape::Sphere { radius } => {
                let center = nalgebra::Point3::from(self.pose.position);
                point_segment_distance(&center, &c.a, &c.b) <= radius + c.radius
            }
            Shape::Box { half_extents } => {
                let inv = self.pose.isometry().inverse();
                let a = (inv * c.a).coords;
                let b = (inv * c.b).coords;
                segment_aabb_distance(&a, &b, &half_extents) <= c.radius
            }
        }
    }

    /// Whether a world-frame point lies inside (or within `margin` of) the object.
    pub fn contains_point(&self, p: &Vector3<f64>, margin: f64) -> bool {
        match self.shape {
            Shape::Sphere { radius } => (p - self.pose.position).norm() <= radius + margin,
            Shape::Box { half_extents } => {
                let local = self.pose.isometry().inverse_transform_vector(&(p - self.pose.position));
                distance::point_aabb_distance(&local, &half_extents) <= margin
            }
        }
    }
}

/// A robot placed in the world.
#[derive(Debug, Clone)]
pub struct SceneRobot {
    pub model: Arc<RobotModel>,
    pub base: Isometry3<f64>,
}

/// World geometry: obstacles plus robots. Queries require a frozen scene.
#[derive(Debug, Clone, Default)]
pub struct Scene {
    objects: BTreeMap<String, SceneObject>,
    robots: BTreeMap<String, SceneRobot>,
    frozen: bool,
}

// ---------------------------------------------------------------------------
// Scene document

#[derive(Debug, Clone, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct SceneDoc {
    #[serde(default)]
    pub objects: Vec<SceneObjectDoc>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SceneObjectDoc {
    pub name: String,
    #[serde(rename = "type")]
    pub kind: ShapeKind,
    /// Full box extents (not half-extents).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub size: Option<[f64; 3]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub radius: Option<f64>,
    #[serde(default)]
    pub pose: PoseDoc,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ShapeKind {
    Box,
    Sphere,
}

impl SceneObjectDoc {
    pub fn to_object(&self) -> Result<SceneObject> {
        let shape = match (self.kind, self.size, self.radius) {
            (ShapeKind::Box, Some(size), None) => Shape::Box {
                half_extents: Vector3::from(size) * 0.5,
            },
            (ShapeKind::Sphere, None, Some(radius)) => Shape::Sphere { radius },
            (ShapeKind::Box, _, _) => {
                return Err(Error::Validation(format!("box `{}` needs `size` only", self.name)))
            }
            (ShapeKind::Sphere, _, _) => {
                return Err(Error::Validation(format!(
                    "sphere `{}` needs `radius` only",
                    self.name
                )))
            }
        };
        SceneObject::new(self.name.clone(), shape, self.pose.to_pose()?)
    }
}

impl SceneObject {
    pub fn to_doc(&self) -> SceneObjectDoc {
        let (kind, size, radius) = match self.shape {
            Shape::Box { half_extents } => (
                ShapeKind::Box,
                Some([half_extents.x * 2.0, half_extents.y * 2.0, half_extents.z * 2.0]),
                None,
            ),
            Shape::Sphere { radius } => (ShapeKind::Sphere, None, Some(radius)),
        };
        SceneObjectDoc {
            name: self.name.clone(),
            kind,
            size,
            radius,
            pose: self.pose.to_doc(),
        }
    }
}

pub fn parse_scene(text: &str) -> Result<Scene> {
    let doc: SceneDoc = serde_json::from_str(text).map_err(|e| Error::Syntax(e.to_string()))?;
    let mut scene = Scene::new();
    for obj in &doc.objects {
        scene.add_object(obj.to_object()?)?;
    }
    Ok(scene)
}

pub fn load_scene(path: impl AsRef<Path>) -> Result<Scene> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_scene(&text)
}

impl Scene {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn is_frozen(&self) -> bool {
        self.frozen
    }

    pub fn freeze(&mut self) {
        self.frozen = true;
    }

    /// Returns an immutable, frozen copy suitable for sharing across workers.
    pub fn frozen_snapshot(&self) -> Arc<Scene> {
        let mut snapshot = self.clone();
        snapshot.frozen = true;
        Arc::new(snapshot)
    }

    fn check_mutable(&self) -> Result<()> {
        if self.frozen {
            Err(Error::WorldFrozen)
        } else {
            Ok(())
        }
    }

    fn check_frozen(&self) -> Result<()> {
        if self.frozen {
            Ok(())
        } else {
            Err(Error::NotFrozen)
        }
    }

    fn name_taken(&self, name: &str) -> bool {
        self.objects.contains_key(name) || self.robots.contains_key(name)
    }

    pub fn add_object(&mut self, object: SceneObject) -> Result<()> {
        self.check_mutable()?;
        if self.name_taken(&object.name) {
            return Err(Error::DuplicateName(object.name));
        }
        self.objects.insert(object.name.clone(), object);
        Ok(())
    }

    /// Adds a box given its full `size`; stored as half-extents.
    pub fn add_box(&mut self, name: &str, size: [f64; 3], pose: Pose) -> Result<()> {
        let half_extents = Vector3::from(size) * 0.5;
        self.add_object(SceneObject::new(name, Shape::Box { half_extents }, pose)?)
    }

    pub fn add_sphere(&mut self, name: &str, radius: f64, pose: Pose) -> Result<()> {
        self.add_object(SceneObject::new(name, Shape::Sphere { radius }, pose)?)
    }

    pub fn remove_object(&mut self, name: &str) -> Result<SceneObject> {
        self.check_mutable()?;
        self.objects
            .remove(name)
            .ok_or_else(|| Error::UnknownName(name.to_string()))
    }

    pub fn add_robot(&mut self, name: &str, model: Arc<RobotModel>, base: Isometry3<f64>) -> Result<()> {
        self.check_mutable()?;
        if self.name_taken(name) {
            return Err(Error::DuplicateName(name.to_string()));
        }
        self.robots.insert(name.to_string(), SceneRobot { model, base });
        Ok(())
    }

    pub fn remove_robot(&mut self, name: &str) -> Result<SceneRobot> {
        self.check_mutable()?;
        self.robots
            .remove(name)
            .ok_or_else(|| Error::UnknownName(name.to_string()))
    }

    pub fn set_base_pose(&mut self, name: &str, base: Isometry3<f64>) -> Result<()> {
        self.check_mutable()?;
        let robot = self
            .robots
            .get_mut(name)
            .ok_or_else(|| Error::UnknownName(name.to_string()))?;
        robot.base = base;
        Ok(())
    }

    pub fn objects(&self) -> impl Iterator<Item = &SceneObject> {
        self.objects.values()
    }

    pub fn object(&self, name: &str) -> Option<&SceneObject> {
        self.objects.get(name)
    }

    pub fn robots(&self) -> impl Iterator<Item = (&String, &SceneRobot)> {
        self.robots.iter()
    }

    pub fn robot(&self, name: &str) -> Result<&SceneRobot> {
        self.robots
            .get(name)
            .ok_or_else(|| Error::UnknownRobot(name.to_string()))
    }

    pub fn to_doc(&self) -> SceneDoc {
        SceneDoc {
            objects: self.objects.values().map(SceneObject::to_doc).collect(),
        }
    }

    /// Bounding box of all obstacles, if any.
    pub fn obstacle_bounds(&self) -> Option<Aabb> {
        self.objects
            .values()
            .map(|o| o.aabb)
            .reduce(|a, b| a.union(&b))
    }

    /// World-frame capsules of `robot` at `q`, tagged with link index.
    pub fn robot_capsules(&self, robot: &str, q: &[f64]) -> Result<Vec<(usize, Capsule)>> {
        let r = self.robot(robot)?;
        let fk = r.model.forward_kinematics_from(&r.base, q)?;
        Ok(r.model.world_capsules(&fk))
    }

    /// End-effector position of `robot` at `q`, in world frame.
    pub fn ee_position(&self, robot: &str, q: &[f64]) -> Result<Vector3<f64>> {
        let r = self.robot(robot)?;
        r.model.ee_position(&r.base, q)
    }

    /// True iff `robot` at `q` touches an obstacle or collides with itself.
    pub fn in_collision(&self, robot: &str, q: &[f64]) -> Result<bool> {
        self.check_frozen()?;
        let r = self.robot(robot)?;
        r.model.check_dimension(q)?;
        let capsules = self.robot_capsules(robot, q)?;
        Ok(self.capsules_hit_obstacles(&capsules) || self_collision(&r.model, &capsules))
    }

    fn capsules_hit_obstacles(&self, capsules: &[(usize, Capsule)]) -> bool {
        capsules.iter().any(|(_, c)| {
            let bb = Aabb::of_capsule(c);
            self.objects
                .values()
                .any(|o| o.aabb.overlaps(&bb) && o.intersects_capsule(c))
        })
    }

    /// True iff any robot is in collision on its own or two robots touch.
    pub fn robots_in_collision(&self, assignments: &BTreeMap<String, Vec<f64>>) -> Result<bool> {
        self.check_frozen()?;
        for name in assignments.keys() {
            self.robot(name)?;
        }
        if let Some(missing) = self.robots.keys().find(|n| !assignments.contains_key(*n)) {
            return Err(Error::MissingAssignment(missing.clone()));
        }
        let mut placed = Vec::with_capacity(assignments.len());
        for (name, q) in assignments {
            if self.in_collision(name, q)? {
                return Ok(true);
            }
            placed.push(self.robot_capsules(name, q)?);
        }
        for i in 0..placed.len() {
            for j in i + 1..placed.len() {
                if capsule_sets_touch(&placed[i], &placed[j]) {
                    return Ok(true);
                }
            }
        }
        Ok(false)
    }

    /// Inter-robot contact only: ignores obstacles and self-collision.
    pub fn robot_pair_in_collision(
        &self,
        robot_a: &str,
        q_a: &[f64],
        robot_b: &str,
        q_b: &[f64],
    ) -> Result<bool> {
        self.check_frozen()?;
        let a = self.robot_capsules(robot_a, q_a)?;
        let b = self.robot_capsules(robot_b, q_b)?;
        Ok(capsule_sets_touch(&a, &b))
    }

    /// Checks the straight joint-space segment from `q_a` to `q_b`.
    ///
    /// The segment is split into `2^k` equal pieces, the smallest power of two
    /// whose max-norm spacing is at most `step`. Dyadic splitting makes finer
    /// steps re-check every sample of coarser ones, so a rejection at one step
    /// implies rejection at every smaller step.
    pub fn edge_valid(&self, robot: &str, q_a: &[f64], q_b: &[f64], step: f64) -> Result<bool> {
        self.check_frozen()?;
        let model = &self.robot(robot)?.model;
        model.check_dimension(q_a)?;
        model.check_dimension(q_b)?;
        if !(step > 0.0) {
            return Err(Error::Validation(format!("interpolation step {step} must be positive")));
        }
        // Canonical endpoint order so that (a, b) and (b, a) sample identical points.
        let (from, to) = if lex_cmp(q_a, q_b).is_gt() {
            (q_b, q_a)
        } else {
            (q_a, q_b)
        };
        for (_, q) in dyadic_samples(from, to, step) {
            if self.in_collision(robot, &q)? {
                return Ok(false);
            }
        }
        Ok(true)
    }
}

fn lex_cmp(a: &[f64], b: &[f64]) -> std::cmp::Ordering {
    for (x, y) in a.iter().zip(b) {
        let o = x.total_cmp(y);
        if o.is_ne() {
            return o;
        }
    }
    a.len().cmp(&b.len())
}

/// Number of dyadic pieces used to sample a segment of max-norm length
/// `span` at spacing `step`.
pub fn dyadic_pieces(span: f64, step: f64) -> u64 {
    let mut pieces: u64 = 1;
    while span / pieces as f64 > step && pieces < (1 << 30) {
        pieces *= 2;
    }
    pieces
}

/// Interpolated samples `(fraction, configuration)` along `from`→`to`,
/// endpoints first, then coarse-to-fine bisection order.
pub fn dyadic_samples(from: &[f64], to: &[f64], step: f64) -> Vec<(f64, Vec<f64>)> {
    let span = from
        .iter()
        .zip(to)
        .map(|(a, b)| (b - a).abs())
        .fold(0.0, f64::max);
    let at = |s: f64| -> Vec<f64> { from.iter().zip(to).map(|(a, b)| a + (b - a) * s).collect() };
    if span == 0.0 {
        return vec![(0.0, from.to_vec())];
    }
    let pieces = dyadic_pieces(span, step);
    let mut out = Vec::with_capacity(pieces as usize + 1);
    out.push((0.0, from.to_vec()));
    out.push((1.0, to.to_vec()));
    let mut stride = pieces;
    while stride > 1 {
        let half = stride / 2;
        let mut i = half;
        while i < pieces {
            let s = i as f64 / pieces as f64;
            out.push((s, at(s)));
            i += stride;
        }
        stride = half;
    }
    out
}

fn self_collision(model: &RobotModel, capsules: &[(usize, Capsule)]) -> bool {
    for (i, (link_a, a)) in capsules.iter().enumerate() {
        for (link_b, b) in &capsules[i + 1..] {
            if link_a == link_b || model.are_adjacent(*link_a, *link_b) {
                continue;
            }
            if capsules_touch(a, b) {
                return true;
            }
        }
    }
    false
}

pub fn capsules_touch(a: &Capsule, b: &Capsule) -> bool {
    segment_segment_distance(&a.a, &a.b, &b.a, &b.b) <= a.radius + b.radius
}

fn capsule_sets_touch(a: &[(usize, Capsule)], b: &[(usize, Capsule)]) -> bool {
    a.iter().any(|(_, ca)| {
        let bb = Aabb::of_capsule(ca);
        b.iter()
            .any(|(_, cb)| bb.overlaps(&Aabb::of_capsule(cb)) && capsules_touch(ca, cb))
    })
}
