"""Rasterizer for the stick figure: appearance factors, backgrounds, frames.

Limbs are drawn as hard-edged thick segments (no anti-aliasing) so the
ground-truth silhouette mask is exact: a pixel is figure iff a limb covers
it, and the image equals the background everywhere else. Limb colors come
from a saturated palette while backgrounds stay in a dark band, so figure
pixels survive 8-bit quantization as strictly different from background.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .camera import Camera, project, world_to_camera
from .errors import DomainError, FigureOutOfFrame
from .skeleton import SkeletonConfig, SkeletonPose, forward_kinematics

# Saturated limb palette; every entry has a channel >= 0.7 while
# backgrounds never exceed 0.45, keeping figure/background separable.
PALETTE = np.array([
    (0.90, 0.10, 0.10),  # red
    (0.10, 0.80, 0.15),  # green
    (0.15, 0.20, 0.90),  # blue
    (0.95, 0.85, 0.10),  # yellow
    (0.85, 0.10, 0.80),  # magenta
    (0.10, 0.80, 0.85),  # cyan
    (0.95, 0.50, 0.05),  # orange
    (0.55, 0.10, 0.90),  # purple
    (0.60, 0.95, 0.10),  # lime
    (0.95, 0.30, 0.55),  # pink
])

BACKGROUND_LO, BACKGROUND_HI = 0.05, 0.45


@dataclass
class AppearanceSpec:
    """Subject-specific visual factors, independent of pose."""

    limb_colors: np.ndarray   # (n_limbs, 3) in [0, 1]
    limb_thickness: float     # stroke width in pixels
    body_scale: float
    background_id: int

    def __post_init__(self):
        self.limb_colors = np.asarray(self.limb_colors, dtype=np.float64)
        if self.limb_colors.ndim != 2 or self.limb_colors.shape[1] != 3:
            raise DomainError("limb_colors must be (n_limbs, 3)")
        if self.limb_colors.min() < 0 or self.limb_colors.max() > 1:
            raise DomainError("limb color components must lie in [0, 1]")
        if self.limb_thickness <= 0:
            raise DomainError("limb_thickness must be positive")
        if self.body_scale <= 0:
            raise DomainError("body_scale must be positive")

    def to_dict(self) -> dict:
        return {
            "limb_colors": self.limb_colors.tolist(),
            "limb_thickness": float(self.limb_thickness),
            "body_scale": float(self.body_scale),
            "background_id": int(self.background_id),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "AppearanceSpec":
        return cls(np.array(d["limb_colors"]), float(d["limb_thickness"]),
                   float(d["body_scale"]), int(d["background_id"]))


@dataclass
class Frame:
    """One rendered observation with exact ground truth."""

    image: np.ndarray      # (H, W, 3) in [0, 1]
    mask_gt: np.ndarray    # (H, W) in {0, 1}
    pose3d_gt: np.ndarray  # (J, 3) world units
    camera: Camera
    subject_id: int = -1
    action_id: int = -1
    view_id: int = -1
    time_index: int = -1
    appearance: AppearanceSpec | None = None

    def __post_init__(self):
        if self.image.shape[:2] != self.mask_gt.shape:
            raise DomainError("image and mask_gt must share (H, W)")
        vals = np.unique(self.mask_gt)
        if not np.all(np.isin(vals, (0, 1))):
            raise DomainError("mask_gt must be binary")
        if not np.all(np.isfinite(self.pose3d_gt)):
            raise DomainError("pose3d_gt must be finite")


def sample_appearance(rng: np.random.Generator, n_limbs: int,
                      thickness_range=(2.0, 5.0), body_scale_range=(0.8, 1.2),
                      background_id: int = 0) -> AppearanceSpec:
    """Draw one subject's appearance factors from the configured ranges."""
    colors = PALETTE[rng.integers(0, len(PALETTE), size=n_limbs)]
    thickness = float(rng.uniform(*thickness_range))
    scale = float(rng.uniform(*body_scale_range))
    return AppearanceSpec(colors, thickness, scale, background_id)


def make_background(image_size: tuple[int, int],
                    rng: np.random.Generator) -> np.ndarray:
    """Smooth per-view background, a convex blend of three dark colors."""
    h, w = image_size
    colors = rng.uniform(BACKGROUND_LO, BACKGROUND_HI, size=(3, 3))
    ys, xs = np.mgrid[0:h, 0:w].astype(np.float64)
    phi = rng.uniform(0, 2 * np.pi)
    ramp = (xs * np.cos(phi) + ys * np.sin(phi))
    ramp = (ramp - ramp.min()) / max(ramp.max() - ramp.min(), 1e-9)
    cx, cy = rng.uniform(0.2, 0.8) * w, rng.uniform(0.2, 0.8) * h
    blob = np.exp(-(((xs - cx) / (0.45 * w)) ** 2 + ((ys - cy) / (0.45 * h)) ** 2))
    w1 = (1 - blob) * ramp
    w2 = (1 - blob) * (1 - ramp)
    image = (w1[..., None] * colors[0] + w2[..., None] * colors[1]
             + blob[..., None] * colors[2])
    return image


def _stroke_segment(cov_buf: np.ndarray, p0: np.ndarray, p1: np.ndarray,
                    half_width: float, grid: np.ndarray) -> np.ndarray:
    """Boolean coverage of a round-capped thick segment on the pixel grid."""
    d = p1 - p0
    denom = float(d @ d)
    rel = grid - p0
    if denom < 1e-12:
        t = np.zeros(grid.shape[:2])
    else:
        t = np.clip((rel @ d) / denom, 0.0, 1.0)
    closest = p0 + t[..., None] * d
    dist2 = np.sum((grid - closest) ** 2, axis=-1)
    np.less_equal(dist2, half_width * half_width, out=cov_buf)
    return cov_buf


def render(
    pose: SkeletonPose,
    appearance: AppearanceSpec,
    camera: Camera,
    background: np.ndarray,
    skeleton: SkeletonConfig,
    margin: float = 2.0,
    subject_id: int = -1,
    action_id: int = -1,
    view_id: int = -1,
    time_index: int = -1,
) -> Frame:
    """Rasterize one observation of the figure over a background.

    The figure is scaled by ``appearance.body_scale`` before projection.
    Limbs are painted far-to-near so nearer limbs occlude farther ones.
    Raises :class:`FigureOutOfFrame` (a retry signal) when any projected
    joint falls within ``margin`` pixels of the image border or outside it.
    """
    h, w = camera.image_size
    if background.shape != (h, w, 3):
        raise DomainError("background size does not match the camera")
    scaled = skeleton.scaled(appearance.body_scale)
    if appearance.limb_colors.shape[0] != len(scaled.bones):
        raise DomainError(
            f"appearance has {appearance.limb_colors.shape[0]} limb colors, "
            f"skeleton has {len(scaled.bones)} bones")
    joints = forward_kinematics(pose, scaled)
    pts2d = project(camera, joints)
    if (pts2d[:, 0].min() < margin or pts2d[:, 0].max() > w - 1 - margin
            or pts2d[:, 1].min() < margin or pts2d[:, 1].max() > h - 1 - margin):
        raise FigureOutOfFrame(
            f"projected joints leave the {margin:.1f}px margin")

    depth = world_to_camera(camera, joints)[:, 2]
    order = sorted(range(len(scaled.bones)),
                   key=lambda i: -(depth[scaled.bones[i].parent]
                                   + depth[scaled.bones[i].child]))

    image = background.copy()
    mask = np.zeros((h, w), dtype=np.uint8)
    ys, xs = np.mgrid[0:h, 0:w].astype(np.float64)
    grid = np.stack([xs, ys], axis=-1)
    cov = np.zeros((h, w), dtype=bool)
    for i in order:
        bone = scaled.bones[i]
        half = 0.5 * appearance.limb_thickness * bone.width_factor
        _stroke_segment(cov, pts2d[bone.parent], pts2d[bone.child], half, grid)
        image[cov] = appearance.limb_colors[i]
        mask[cov] = 1

    return Frame(image, mask, joints, camera, subject_id, action_id,
                 view_id, time_index, appearance)
