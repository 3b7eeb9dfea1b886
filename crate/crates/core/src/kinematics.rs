//! Serial-chain robot models and forward kinematics.
//!
//! A robot is a chain of revolute joints. Each joint connects a parent link
//! to a child link through a fixed origin transform followed by a rotation
//! about the joint axis. Links carry capsules for collision checking.

use std::collections::HashMap;
use std::path::Path;

use nalgebra::{Isometry3, Point3, Translation3, Unit, UnitQuaternion, Vector3};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Joint-space configuration, radians, one value per joint.
pub type Configuration = Vec<f64>;

const UNIT_TOLERANCE: f64 = 1e-9;
// Quaternions typed by hand rarely have norm 1 to nine digits; anything this
// close is renormalized, anything further is rejected.
const QUATERNION_RENORMALIZE_TOLERANCE: f64 = 1e-6;

/// Rigid pose: position in meters plus a unit quaternion.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Pose {
    pub position: Vector3<f64>,
    pub orientation: UnitQuaternion<f64>,
}

impl Pose {
    pub fn identity() -> Self {
        Self::from_position([0.0, 0.0, 0.0])
    }

    pub fn from_position(p: [f64; 3]) -> Self {
        Self {
            position: Vector3::from(p),
            orientation: UnitQuaternion::identity(),
        }
    }

    /// Builds a pose from a position and an `[x, y, z, w]` quaternion.
    pub fn new(p: [f64; 3], q: [f64; 4]) -> Result<Self> {
        Ok(Self {
            position: Vector3::from(p),
            orientation: quaternion_from_xyzw(q)?,
        })
    }

    pub fn isometry(&self) -> Isometry3<f64> {
        Isometry3::from_parts(Translation3::from(self.position), self.orientation)
    }

    pub fn from_isometry(iso: &Isometry3<f64>) -> Self {
        Self {
            position: iso.translation.vector,
            orientation: iso.rotation,
        }
    }

    pub fn to_doc(&self) -> PoseDoc {
        let q = self.orientation.quaternion();
        PoseDoc {
            p: [self.position.x, self.position.y, self.position.z],
            q: [q.i, q.j, q.k, q.w],
        }
    }
}

impl Default for Pose {
    fn default() -> Self {
        Self::identity()
    }
}

/// Serialized pose: `{"p": [x, y, z], "q": [qx, qy, qz, qw]}`.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct PoseDoc {
    #[serde(default)]
    pub p: [f64; 3],
    #[serde(default = "identity_xyzw")]
    pub q: [f64; 4],
}

fn identity_xyzw() -> [f64; 4] {
    [0.0, 0.0, 0.0, 1.0]
}

impl Default for PoseDoc {
    fn default() -> Self {
        Self {
            p: [0.0; 3],
            q: identity_xyzw(),
        }
    }
}

impl PoseDoc {
    pub fn to_pose(&self) -> Result<Pose> {
        Pose::new(self.p, self.q)
    }
}

pub(crate) fn quaternion_from_xyzw(q: [f64; 4]) -> Result<UnitQuaternion<f64>> {
    let raw = nalgebra::Quaternion::new(q[3], q[0], q[1], q[2]);
    let norm = raw.norm();
    if !norm.is_finite() || (norm - 1.0).abs() > QUATERNION_RENORMALIZE_TOLERANCE {
        return Err(Error::Validation(format!(
            "quaternion {q:?} is not unit (norm {norm})"
        )));
    }
    Ok(UnitQuaternion::from_quaternion(raw))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JointLimits {
    pub lo: f64,
    pub hi: f64,
}

impl JointLimits {
    pub fn contains(&self, value: f64) -> bool {
        value >= self.lo && value <= self.hi
    }

    pub fn span(&self) -> f64 {
        self.hi - self.lo
    }
}

#[derive(Debug, Clone)]
pub struct Joint {
    pub name: String,
    pub parent: usize,
    pub child: usize,
    pub axis: Unit<Vector3<f64>>,
    pub origin: Isometry3<f64>,
    pub limits: JointLimits,
}

/// Rigid attachment of a child link to its parent (tool frames, flanges).
#[derive(Debug, Clone)]
pub struct FixedJoint {
    pub name: String,
    pub parent: usize,
    pub child: usize,
    pub origin: Isometry3<f64>,
}

#[derive(Debug, Clone, Copy)]
enum Segment {
    Revolute(usize),
    Fixed(usize),
}

/// Segment `a`–`b` swept by a sphere of `radius`, expressed in link frame.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Capsule {
    pub a: Point3<f64>,
    pub b: Point3<f64>,
    pub radius: f64,
}

impl Capsule {
    pub fn transformed(&self, iso: &Isometry3<f64>) -> Capsule {
        Capsule {
            a: iso * self.a,
            b: iso * self.b,
            radius: self.radius,
        }
    }
}

#[derive(Debug, Clone)]
pub struct Link {
    pub name: String,
    pub capsules: Vec<Capsule>,
}

/// Immutable serial-chain robot description.
#[derive(Debug, Clone)]
pub struct RobotModel {
    pub name: String,
    pub joints: Vec<Joint>,
    pub fixed_joints: Vec<FixedJoint>,
    pub links: Vec<Link>,
    pub end_effector: usize,
    pub base_pose: Isometry3<f64>,
    segments: Vec<Segment>,
    root: usize,
    adjacent: Vec<(usize, usize)>,
}

/// Output of [`RobotModel::forward_kinematics`].
#[derive(Debug, Clone, PartialEq)]
pub struct FkResult {
    /// World transform of each link, indexed like [`RobotModel::links`].
    pub link_poses: Vec<Isometry3<f64>>,
    pub end_effector: Pose,
}

// ---------------------------------------------------------------------------
// Robot-spec document

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RobotSpecDoc {
    pub name: String,
    #[serde(default)]
    pub base_pose: PoseDoc,
    pub joints: Vec<JointDoc>,
    pub links: Vec<LinkDoc>,
    pub end_effector: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct JointDoc {
    pub name: String,
    #[serde(rename = "type", default)]
    pub kind: JointKind,
    pub parent: String,
    pub child: String,
    #[serde(default)]
    pub axis: Option<[f64; 3]>,
    #[serde(default)]
    pub origin: PoseDoc,
    #[serde(default)]
    pub limits: Option<[f64; 2]>,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum JointKind {
    #[default]
    Revolute,
    Fixed,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LinkDoc {
    pub name: String,
    #[serde(default)]
    pub capsules: Vec<CapsuleDoc>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CapsuleDoc {
    pub a: [f64; 3],
    pub b: [f64; 3],
    pub radius: f64,
}

/// Parses and validates a robot-spec document (JSON).
pub fn parse_robot_spec(text: &str) -> Result<RobotModel> {
    let doc: RobotSpecDoc =
        serde_json::from_str(text).map_err(|e| Error::Syntax(e.to_string()))?;
    RobotModel::from_doc(&doc)
}

pub fn load_robot_spec(path: impl AsRef<Path>) -> Result<RobotModel> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_robot_spec(&text)
}

impl RobotModel {
    pub fn from_doc(doc: &RobotSpecDoc) -> Result<Self> {
        let mut link_index = HashMap::new();
        let mut links = Vec::with_capacity(doc.links.len());
        for link in &doc.links {
            if link_index.insert(link.name.clone(), links.len()).is_some() {
                return Err(Error::Validation(format!("duplicate link `{}`", link.name)));
            }
            let mut capsules = Vec::with_capacity(link.capsules.len());
            for c in &link.capsules {
                if !(c.radius > 0.0 && c.radius.is_finite()) {
                    return Err(Error::Validation(format!(
                        "capsule radius on link `{}` must be positive",
                        link.name
                    )));
                }
                capsules.push(Capsule {
                    a: Point3::from(c.a),
                    b: Point3::from(c.b),
                    radius: c.radius,
                });
            }
            links.push(Link {
                name: link.name.clone(),
                capsules,
            });
        }
        let lookup = |name: &str, what: &str| -> Result<usize> {
            link_index
                .get(name)
                .copied()
                .ok_or_else(|| Error::Validation(format!("{what} names unknown link `{name}`")))
        };

        let mut is_child = vec![false; links.len()];
        let mut joints = Vec::new();
        let mut fixed_joints = Vec::new();
        let mut segments = Vec::with_capacity(doc.joints.len());
        let mut edges = Vec::with_capacity(doc.joints.len());
        for j in &doc.joints {
            let parent = lookup(&j.parent, &format!("joint `{}` parent", j.name))?;
            let child = lookup(&j.child, &format!("joint `{}` child", j.name))?;
            if parent == child {
                return Err(Error::Validation(format!("joint `{}` links a link to itself", j.name)));
            }
            if std::mem::replace(&mut is_child[child], true) {
                return Err(Error::Validation(format!(
                    "link `{}` is the child of more than one joint",
                    j.child
                )));
            }
            let origin = j.origin.to_pose()?.isometry();
            edges.push((parent, child));
            match j.kind {
                JointKind::Fixed => {
                    segments.push(Segment::Fixed(fixed_joints.len()));
                    fixed_joints.push(FixedJoint {
                        name: j.name.clone(),
                        parent,
                        child,
                        origin,
                    });
                }
                JointKind::Revolute => {
                    let axis = j.axis.ok_or_else(|| {
                        Error::Validation(format!("revolute joint `{}` needs an axis", j.name))
                    })?;
                    let axis = Vector3::from(axis);
                    if (axis.norm() - 1.0).abs() > UNIT_TOLERANCE {
                        return Err(Error::Validation(format!(
                            "joint `{}` axis {:?} is not unit length",
                            j.name,
                            axis.as_slice()
                        )));
                    }
                    let [lo, hi] = j.limits.ok_or_else(|| {
                        Error::Validation(format!("revolute joint `{}` needs limits", j.name))
                    })?;
                    if !(lo.is_finite() && hi.is_finite() && lo < hi) {
                        return Err(Error::Validation(format!(
                            "joint `{}` limits [{lo}, {hi}] need lo < hi",
                            j.name
                        )));
                    }
                    segments.push(Segment::Revolute(joints.len()));
                    joints.push(Joint {
                        name: j.name.clone(),
                        parent,
                        child,
                        axis: Unit::new_unchecked(axis),
                        origin,
                        limits: JointLimits { lo, hi },
                    });
                }
            }
        }
        if joints.is_empty() {
            return Err(Error::Validation("robot needs at least one revolute joint".into()));
        }

        let roots: Vec<usize> = (0..links.len()).filter(|&i| !is_child[i]).collect();
        if roots.len() != 1 {
            return Err(Error::Validation(format!(
                "expected exactly one root link, found {}",
                roots.len()
            )));
        }
        let root = roots[0];
        // Joints must be listed root to tip so FK can run in a single pass.
        let mut placed = vec![false; links.len()];
        placed[root] = true;
        for (j, &(parent, child)) in doc.joints.iter().zip(&edges) {
            if !placed[parent] {
                return Err(Error::Validation(format!(
                    "joint `{}` appears before its parent link is placed",
                    j.name
                )));
            }
            placed[child] = true;
        }

        let end_effector = link_index.get(&doc.end_effector).copied().ok_or_else(|| {
            Error::Validation(format!("end_effector `{}` is not a link", doc.end_effector))
        })?;
        Ok(Self {
            name: doc.name.clone(),
            joints,
            fixed_joints,
            links,
            end_effector,
            base_pose: doc.base_pose.to_pose()?.isometry(),
            segments,
            root,
            adjacent: edges,
        })
    }

    pub fn dof(&self) -> usize {
        self.joints.len()
    }

    pub fn root_link(&self) -> usize {
        self.root
    }

    pub fn link_index(&self, name: &str) -> Option<usize> {
        self.links.iter().position(|l| l.name == name)
    }

    pub fn limits(&self) -> impl Iterator<Item = JointLimits> + '_ {
        self.joints.iter().map(|j| j.limits)
    }

    /// Link pairs connected by a joint; excluded from self-collision.
    pub fn adjacent_links(&self) -> &[(usize, usize)] {
        &self.adjacent
    }

    pub fn are_adjacent(&self, a: usize, b: usize) -> bool {
        self.adjacent
            .iter()
            .any(|&(p, c)| (p == a && c == b) || (p == b && c == a))
    }

    pub fn set_end_effector(&mut self, link: &str) -> Result<()> {
        self.end_effector = self
            .link_index(link)
            .ok_or_else(|| Error::Validation(format!("end_effector `{link}` is not a link")))?;
        Ok(())
    }

    pub fn check_dimension(&self, q: &[f64]) -> Result<()> {
        if q.len() != self.dof() {
            return Err(Error::DimensionMismatch {
                expected: self.dof(),
                got: q.len(),
            });
        }
        Ok(())
    }

    pub fn check_limits(&self, q: &[f64]) -> Result<()> {
        self.check_dimension(q)?;
        for (i, (j, &v)) in self.joints.iter().zip(q).enumerate() {
            if !j.limits.contains(v) {
                return Err(Error::OutOfLimits {
                    joint: i,
                    value: v,
                    lo: j.limits.lo,
                    hi: j.limits.hi,
                });
            }
        }
        Ok(())
    }

    pub fn forward_kinematics(&self, q: &[f64]) -> Result<FkResult> {
        self.forward_kinematics_from(&self.base_pose, q)
    }

    /// FK with the chain root placed at `base` instead of the model's own base pose.
    pub fn forward_kinematics_from(&self, base: &Isometry3<f64>, q: &[f64]) -> Result<FkResult> {
        self.check_dimension(q)?;
        let mut link_poses = vec![Isometry3::identity(); self.links.len()];
        link_poses[self.root] = *base;
        for segment in &self.segments {
            match *segment {
                Segment::Revolute(i) => {
                    let joint = &self.joints[i];
                    let rotation = UnitQuaternion::from_axis_angle(&joint.axis, q[i]);
                    link_poses[joint.child] = link_poses[joint.parent] * joint.origin * rotation;
                }
                Segment::Fixed(i) => {
                    let joint = &self.fixed_joints[i];
                    link_poses[joint.child] = link_poses[joint.parent] * joint.origin;
                }
            }
        }
        let end_effector = Pose::from_isometry(&link_poses[self.end_effector]);
        Ok(FkResult {
            link_poses,
            end_effector,
        })
    }

    pub fn ee_position(&self, base: &Isometry3<f64>, q: &[f64]) -> Result<Vector3<f64>> {
        Ok(self.forward_kinematics_from(base, q)?.end_effector.position)
    }

    /// World-frame capsules tagged with their link index.
    pub fn world_capsules(&self, fk: &FkResult) -> Vec<(usize, Capsule)> {
        self.links
            .iter()
            .enumerate()
            .flat_map(|(i, link)| {
                let pose = fk.link_poses[i];
                link.capsules.iter().map(move |c| (i, c.transformed(&pose)))
            })
            .collect()
    }

    /// Upper bound on the distance from the base to any point of the robot.
    pub fn reach(&self) -> f64 {
        let chain: f64 = self
            .joints
            .iter()
            .map(|j| j.origin.translation.vector.norm())
            .chain(self.fixed_joints.iter().map(|j| j.origin.translation.vector.norm()))
            .sum();
        let geometry = self
            .links
            .iter()
            .flat_map(|l| &l.capsules)
            .map(|c| c.a.coords.norm().max(c.b.coords.norm()) + c.radius)
            .fold(0.0, f64::max);
        chain + geometry
    }
}

/// End-effector distance travelled along `waypoints`, in meters.
pub fn ee_path_length(robot: &RobotModel, waypoints: &[Configuration]) -> Result<f64> {
    ee_path_length_from(robot, &robot.base_pose, waypoints)
}

pub fn ee_path_length_from(
    robot: &RobotModel,
    base: &Isometry3<f64>,
    waypoints: &[Configuration],
) -> Result<f64> {
    if waypoints.is_empty() {
        return Err(Error::EmptyInput);
    }
    let mut total = 0.0;
    let mut prev = robot.ee_position(base, &waypoints[0])?;
    for q in &waypoints[1..] {
        let p = robot.ee_position(base, q)?;
        total += (p - prev).norm();
        prev = p;
    }
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::FRAC_PI_2;

    const PLANAR_2LINK: &str = r#"{
        "name": "planar",
        "joints": [
            {"name": "j1", "parent": "base", "child": "l1", "axis": [0,0,1], "limits": [-3.0, 3.0]},
            {"name": "j2", "parent": "l1", "child": "l2", "axis": [0,0,1],
             "origin": {"p": [1,0,0]}, "limits": [-3.0, 3.0]},
            {"name": "tool", "type": "fixed", "parent": "l2", "child": "tip", "origin": {"p": [1,0,0]}}
        ],
        "links": [
            {"name": "base"},
            {"name": "l1", "capsules": [{"a": [0,0,0], "b": [1,0,0], "radius": 0.05}]},
            {"name": "l2", "capsules": [{"a": [0,0,0], "b": [1,0,0], "radius": 0.05}]},
            {"name": "tip"}
        ],
        "end_effector": "tip"
    }"#;

    fn two_link() -> RobotModel {
        parse_robot_spec(PLANAR_2LINK).unwrap()
    }

    #[test]
    fn parses_planar_chain() {
        let robot = two_link();
        assert_eq!(robot.dof(), 2);
        assert_eq!(robot.root_link(), 0);
        assert!(robot.are_adjacent(1, 2));
        assert!(robot.are_adjacent(3, 2));
        assert!(!robot.are_adjacent(1, 3));
    }

    #[test]
    fn rejects_degenerate_limits() {
        let text = PLANAR_2LINK.replacen("[-3.0, 3.0]", "[1.0, 1.0]", 1);
        assert!(matches!(parse_robot_spec(&text), Err(Error::Validation(_))));
    }

    #[test]
    fn rejects_missing_end_effector() {
        let text = PLANAR_2LINK.replace(r#""end_effector": "tip""#, r#""end_effector": "hand""#);
        assert!(matches!(parse_robot_spec(&text), Err(Error::Validation(_))));
    }

    #[test]
    fn rejects_non_unit_axis() {
        let text = PLANAR_2LINK.replacen("[0,0,1]", "[0,0,1.001]", 1);
        assert!(matches!(parse_robot_spec(&text), Err(Error::Validation(_))));
    }

    #[test]
    fn rejects_out_of_order_joints() {
        let doc: RobotSpecDoc = serde_json::from_str(PLANAR_2LINK).unwrap();
        let mut doc = doc;
        doc.joints.swap(0, 1);
        assert!(matches!(RobotModel::from_doc(&doc), Err(Error::Validation(_))));
    }

    #[test]
    fn rejects_malformed_document() {
        assert!(matches!(parse_robot_spec("{ not json"), Err(Error::Syntax(_))));
    }

    #[test]
    fn straight_chain_reaches_two_meters() {
        let fk = two_link().forward_kinematics(&[0.0, 0.0]).unwrap();
        assert!((fk.end_effector.position - Vector3::new(2.0, 0.0, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn bent_chain() {
        let fk = two_link()
            .forward_kinematics(&[FRAC_PI_2, -FRAC_PI_2])
            .unwrap();
        assert!((fk.end_effector.position - Vector3::new(1.0, 1.0, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn dimension_mismatch() {
        assert_eq!(
            two_link().forward_kinematics(&[0.0]).unwrap_err(),
            Error::DimensionMismatch {
                expected: 2,
                got: 1
            }
        );
    }

    #[test]
    fn single_waypoint_has_zero_length() {
        assert_eq!(ee_path_length(&two_link(), &[vec![0.3, 0.2]]).unwrap(), 0.0);
    }

    #[test]
    fn path_length_sums_chords() {
        let robot = two_link();
        // ee positions (2,0,0) -> (1,1,0) -> (0,2,0)
        let a = vec![0.0, 0.0];
        let b = vec![FRAC_PI_2, -FRAC_PI_2];
        let c = vec![FRAC_PI_2, 0.0];
        let len = ee_path_length(&robot, &[a, b, c]).unwrap();
        assert!((len - 2.0 * 2f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn path_length_unit_chords() {
        // planar arm with the tool frame at l2's origin: ee = elbow position
        let text = PLANAR_2LINK.replace(r#""origin": {"p": [1,0,0]}}"#, r#""origin": {"p": [0,0,0]}}"#);
        let robot = parse_robot_spec(&text).unwrap();
        // elbow at (1,0,0) -> (0,1,0) -> (-1,0,0): two chords of sqrt(2)
        let path = [vec![0.0, 0.0], vec![FRAC_PI_2, 0.0], vec![2.0 * FRAC_PI_2, 0.0]];
        let len = ee_path_length(&robot, &path).unwrap();
        assert!((len - 2.0 * 2f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    #[allow(clippy::approx_constant)] // a rounded unit quaternion is the point
    fn quaternion_renormalization() {
        assert!(Pose::new([0.0; 3], [0.0, 0.0, 0.7071068, 0.7071068]).is_ok());
        assert!(Pose::new([0.0; 3], [0.0, 0.0, 1.0, 1.0]).is_err());
    }
}
