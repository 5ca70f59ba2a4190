"""Articulated stick-figure skeleton: forward kinematics and pose sampling.

The default figure has 12 joints and 12 articulated degrees of freedom:
a two-segment torso, a head, two two-segment arms hanging from the neck
and two two-segment legs. World units are millimetre-like (standing
height about 1700) so per-joint position errors read on a familiar scale.
Coordinates are z-up; the figure faces +x when ``root_yaw`` is zero.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError

# Names are also the drawing order (renderer sorts by depth anyway).
JOINT_NAMES = [
    "pelvis", "spine", "neck", "head",
    "l_elbow", "l_hand", "r_elbow", "r_hand",
    "l_knee", "l_foot", "r_knee", "r_foot",
]

_LEG_SPLAY = 0.26  # radians, sideways lean of the thighs in the bind pose


@dataclass(frozen=True)
class BoneSpec:
    """One rigid segment between two joints.

    ``base_dir`` is the unit direction of the bone in its parent frame
    when every angle is zero; ``dofs`` lists (axis, angle_index) pairs of
    the rotations applied, in order, on top of the parent frame.
    ``width_factor`` scales the limb thickness when rendered.
    """

    name: str
    parent: int
    child: int
    base_dir: tuple[float, float, float]
    length: float
    dofs: tuple[tuple[str, int], ...]
    width_factor: float = 1.0


@dataclass(frozen=True)
class SkeletonConfig:
    """Bone tree, bone lengths, DoF limits and the canonical bind pose."""

    bones: tuple[BoneSpec, ...]
    joint_names: tuple[str, ...]
    dof_names: tuple[str, ...]
    dof_limits: np.ndarray  # (n_dofs, 2)
    t_pose: np.ndarray = field(init=False)  # (J, 3), root at origin

    def __post_init__(self):
        # Bind pose by plain accumulation of base directions; the full FK
        # path must reproduce this for the all-zeros pose.
        pos = np.zeros((self.n_joints, 3))
        for bone in self.bones:
            pos[bone.child] = pos[bone.parent] + np.asarray(bone.base_dir) * bone.length
        object.__setattr__(self, "t_pose", pos)

    @property
    def n_joints(self) -> int:
        return len(self.joint_names)

    @property
    def n_dofs(self) -> int:
        return len(self.dof_names)

    def bone_lengths(self) -> np.ndarray:
        return np.array([b.length for b in self.bones])

    def scaled(self, factor: float) -> "SkeletonConfig":
        """Return a copy with every bone length multiplied by ``factor``."""
        if factor <= 0:
            raise DomainError(f"scale factor must be positive, got {factor}")
        bones = tuple(
            BoneSpec(b.name, b.parent, b.child, b.base_dir, b.length * factor,
                     b.dofs, b.width_factor)
            for b in self.bones
        )
        return SkeletonConfig(bones, self.joint_names, self.dof_names,
                              self.dof_limits)

    def standing_root_height(self) -> float:
        """Height of the pelvis above the feet in the bind pose."""
        return -float(self.t_pose[JOINT_NAMES.index("l_foot"), 2])


@dataclass
class SkeletonPose:
    """Joint angles (radians) plus root placement in world coordinates."""

    joint_angles: np.ndarray
    root_position: np.ndarray
    root_yaw: float = 0.0

    def __post_init__(self):
        self.joint_angles = np.asarray(self.joint_angles, dtype=np.float64)
        self.root_position = np.asarray(self.root_position, dtype=np.float64)
        if self.root_position.shape != (3,):
            raise DomainError("root_position must be a 3-vector")
        if not (np.all(np.isfinite(self.joint_angles))
                and np.all(np.isfinite(self.root_position))
                and np.isfinite(self.root_yaw)):
            raise DomainError("pose fields must be finite")


def default_skeleton() -> SkeletonConfig:
    """The 12-joint, 12-DoF figure used throughout the package."""
    sp, cs = np.sin(_LEG_SPLAY), np.cos(_LEG_SPLAY)
    j = {name: i for i, name in enumerate(JOINT_NAMES)}
    dof_names = (
        "torso_pitch", "torso_side", "torso_twist", "head_nod",
        "l_shoulder", "l_elbow", "r_shoulder", "r_elbow",
        "l_hip", "l_knee", "r_hip", "r_knee",
    )
    d = {name: i for i, name in enumerate(dof_names)}
    bones = (
        BoneSpec("torso_lo", j["pelvis"], j["spine"], (0, 0, 1), 280,
                 (("x", d["torso_pitch"]), ("y", d["torso_side"])), 1.7),
        BoneSpec("torso_up", j["spine"], j["neck"], (0, 0, 1), 280,
                 (("z", d["torso_twist"]),), 1.7),
        BoneSpec("head", j["neck"], j["head"], (0, 0, 1), 140,
                 (("x", d["head_nod"]),), 2.6),
        BoneSpec("l_upper_arm", j["neck"], j["l_elbow"], (0, 1, 0), 260,
                 (("x", d["l_shoulder"]),)),
        BoneSpec("l_forearm", j["l_elbow"], j["l_hand"], (0, 1, 0), 240,
                 (("x", d["l_elbow"]),)),
        BoneSpec("r_upper_arm", j["neck"], j["r_elbow"], (0, -1, 0), 260,
                 (("x", d["r_shoulder"]),)),
        BoneSpec("r_forearm", j["r_elbow"], j["r_hand"], (0, -1, 0), 240,
                 (("x", d["r_elbow"]),)),
        BoneSpec("l_thigh", j["pelvis"], j["l_knee"], (0, sp, -cs), 420,
                 (("y", d["l_hip"]),)),
        BoneSpec("l_shin", j["l_knee"], j["l_foot"], (0, sp, -cs), 400,
                 (("y", d["l_knee"]),)),
        BoneSpec("r_thigh", j["pelvis"], j["r_knee"], (0, -sp, -cs), 420,
                 (("y", d["r_hip"]),)),
        BoneSpec("r_shin", j["r_knee"], j["r_foot"], (0, -sp, -cs), 400,
                 (("y", d["r_knee"]),)),
    )
    limits = np.array([
        (-0.45, 0.45),   # torso_pitch
        (-0.35, 0.35),   # torso_side
        (-0.60, 0.60),   # torso_twist
        (-0.50, 0.50),   # head_nod
        (-1.45, 1.45),   # l_shoulder
        (-1.50, 1.50),   # l_elbow
        (-1.45, 1.45),   # r_shoulder
        (-1.50, 1.50),   # r_elbow
        (-0.90, 0.90),   # l_hip
        (-1.20, 1.20),   # l_knee
        (-0.90, 0.90),   # r_hip
        (-1.20, 1.20),   # r_knee
    ])
    return SkeletonConfig(bones, tuple(JOINT_NAMES), dof_names, limits)


def _axis_rotation(axis: str, angle: float) -> np.ndarray:
    c, s = np.cos(angle), np.sin(angle)
    if axis == "x":
        return np.array([[1, 0, 0], [0, c, -s], [0, s, c]])
    if axis == "y":
        return np.array([[c, 0, s], [0, 1, 0], [-s, 0, c]])
    if axis == "z":
        return np.array([[c, -s, 0], [s, c, 0], [0, 0, 1]])
    raise DomainError(f"unknown rotation axis {axis!r}")


def forward_kinematics(pose: SkeletonPose, config: SkeletonConfig) -> np.ndarray:
    """Joint positions (J, 3) in world coordinates for a valid pose.

    Rotations are accumulated down the bone tree, so every bone keeps its
    configured length exactly. Raises :class:`DomainError` if any angle is
    outside its configured limit interval.
    """
    angles = pose.joint_angles
    if angles.shape != (config.n_dofs,):
        raise DomainError(
            f"expected {config.n_dofs} joint angles, got {angles.shape}")
    lo, hi = config.dof_limits[:, 0], config.dof_limits[:, 1]
    bad = np.nonzero((angles < lo) | (angles > hi))[0]
    if bad.size:
        i = int(bad[0])
        raise DomainError(
            f"angle {config.dof_names[i]!r} = {angles[i]:.4f} outside "
            f"limits [{lo[i]:.4f}, {hi[i]:.4f}]")

    positions = np.zeros((config.n_joints, 3))
    frames = [None] * config.n_joints
    positions[0] = pose.root_position
    frames[0] = _axis_rotation("z", pose.root_yaw)
    for bone in config.bones:
        local = np.eye(3)
        for axis, idx in bone.dofs:
            local = local @ _axis_rotation(axis, angles[idx])
        frame = frames[bone.parent] @ local
        frames[bone.child] = frame
        positions[bone.child] = (
            positions[bone.parent] + frame @ (np.asarray(bone.base_dir) * bone.length))
    return positions


@dataclass(frozen=True)
class ActionSpec:
    """Sampling statistics of one action class.

    Actions differ both in their base pose and in which angles their
    random walk excites, so the action label is decodable from pose alone.
    """

    action_id: int
    base_angles: np.ndarray
    walk_sigma: np.ndarray


def default_actions(n_actions: int, config: SkeletonConfig) -> list[ActionSpec]:
    """Deterministic bank of action classes for the default skeleton."""
    d = {name: i for i, name in enumerate(config.dof_names)}
    actions = []
    for a in range(n_actions):
        base = np.zeros(config.n_dofs)
        sigma = np.full(config.n_dofs, 0.02)
        if a % 2 == 0:
            # arms raised overhead, strong arm motion ("wave"-like)
            base[d["l_shoulder"]] = 1.1
            base[d["r_shoulder"]] = -1.1
            base[d["l_elbow"]] = 0.5
            base[d["r_elbow"]] = -0.5
            for k in ("l_shoulder", "r_shoulder", "l_elbow", "r_elbow", "head_nod"):
                sigma[d[k]] = 0.10
        else:
            # arms down at the sides, legs swinging ("march"-like)
            base[d["l_shoulder"]] = -1.15
            base[d["r_shoulder"]] = 1.15
            base[d["l_hip"]] = 0.35
            base[d["r_hip"]] = -0.35
            base[d["l_knee"]] = 0.45
            base[d["r_knee"]] = 0.45
            for k in ("l_hip", "r_hip", "l_knee", "r_knee"):
                sigma[d[k]] = 0.10
        if a >= 2:
            # further classes get a deterministic torso tilt to stay separable
            tilt = 0.12 * (1 + a // 2) * (-1 if a % 4 >= 2 else 1)
            base[d["torso_pitch"]] = np.clip(tilt, *config.dof_limits[d["torso_pitch"]])
        actions.append(ActionSpec(a, base, sigma))
    return actions


def sample_angle_sequence(
    action: ActionSpec,
    config: SkeletonConfig,
    length: int,
    rng: np.random.Generator,
    keyframe_every: int = 5,
    max_step_delta: float = 0.05,
) -> np.ndarray:
    """Sample a smooth (length, n_dofs) angle trajectory for one action.

    Keyframes follow a bounded random walk around the action's base pose;
    frames in between are linear interpolations, so consecutive frames
    never differ by more than ``max_step_delta`` in any angle.
    """
    lo, hi = config.dof_limits[:, 0], config.dof_limits[:, 1]
    n_key = int(np.ceil((length - 1) / keyframe_every)) + 1 if length > 1 else 1
    max_jump = keyframe_every * max_step_delta

    keys = np.zeros((n_key, config.n_dofs))
    keys[0] = np.clip(action.base_angles + rng.normal(0, action.walk_sigma), lo, hi)
    for k in range(1, n_key):
        step = rng.normal(0, action.walk_sigma)
        # gentle pull back toward the base pose keeps classes compact
        step = step + 0.15 * (action.base_angles - keys[k - 1])
        step = np.clip(step, -max_jump, max_jump)
        keys[k] = np.clip(keys[k - 1] + step, lo, hi)

    out = np.zeros((length, config.n_dofs))
    for t in range(length):
        k, frac = divmod(t, keyframe_every)
        if k + 1 >= n_key:
            out[t] = keys[-1]
        else:
            w = frac / keyframe_every
            out[t] = (1 - w) * keys[k] + w * keys[k + 1]
    return out
