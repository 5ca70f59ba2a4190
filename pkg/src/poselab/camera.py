"""Pinhole cameras: calibration container, projection and view rigs."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DomainError

ORTHONORMAL_TOL = 1e-6


@dataclass
class Camera:
    """World-to-camera rigid transform plus pinhole intrinsics.

    Camera frame convention: +z looks into the scene, +x is image-right,
    +y is image-down, so pixel coordinates come out as (column, row).
    """

    rotation: np.ndarray        # (3, 3), world -> camera
    translation: np.ndarray     # (3,)
    focal: float
    principal_point: np.ndarray  # (2,)
    image_size: tuple[int, int]  # (H, W)

    def __post_init__(self):
        self.rotation = np.asarray(self.rotation, dtype=np.float64)
        self.translation = np.asarray(self.translation, dtype=np.float64)
        self.principal_point = np.asarray(self.principal_point, dtype=np.float64)
        self.image_size = (int(self.image_size[0]), int(self.image_size[1]))
        if self.rotation.shape != (3, 3):
            raise DomainError("rotation must be 3x3")
        err = np.abs(self.rotation.T @ self.rotation - np.eye(3)).max()
        if err > ORTHONORMAL_TOL:
            raise DomainError(f"rotation is not orthonormal (max error {err:.2e})")
        det = np.linalg.det(self.rotation)
        if abs(det - 1.0) > ORTHONORMAL_TOL:
            raise DomainError(f"rotation determinant {det:.8f} != 1")
        if self.focal <= 0:
            raise DomainError("focal length must be positive")

    def to_dict(self) -> dict:
        return {
            "rotation": self.rotation.tolist(),
            "translation": self.translation.tolist(),
            "focal": float(self.focal),
            "principal_point": self.principal_point.tolist(),
            "image_size": list(self.image_size),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "Camera":
        return cls(
            rotation=np.array(d["rotation"]),
            translation=np.array(d["translation"]),
            focal=float(d["focal"]),
            principal_point=np.array(d["principal_point"]),
            image_size=tuple(d["image_size"]),
        )


def world_to_camera(camera: Camera, points: np.ndarray) -> np.ndarray:
    """Transform (N, 3) world points into the camera frame."""
    pts = np.asarray(points, dtype=np.float64)
    return pts @ camera.rotation.T + camera.translation


def project(camera: Camera, points: np.ndarray) -> np.ndarray:
    """Pinhole-project (N, 3) world points to (N, 2) pixel coordinates.

    Raises :class:`DomainError` if any point has non-positive depth.
    """
    cam = world_to_camera(camera, np.atleast_2d(points))
    z = cam[:, 2]
    if np.any(z <= 0):
        raise DomainError(
            f"{int(np.sum(z <= 0))} point(s) at non-positive depth")
    uv = camera.focal * cam[:, :2] / z[:, None] + camera.principal_point
    return uv


def look_at(position: np.ndarray, target: np.ndarray,
            world_up=(0.0, 0.0, 1.0)) -> tuple[np.ndarray, np.ndarray]:
    """Rotation and translation of a camera at ``position`` facing ``target``."""
    position = np.asarray(position, dtype=np.float64)
    forward = np.asarray(target, dtype=np.float64) - position
    forward = forward / np.linalg.norm(forward)
    right = np.cross(forward, np.asarray(world_up, dtype=np.float64))
    nr = np.linalg.norm(right)
    if nr < 1e-9:
        raise DomainError("camera forward direction is parallel to world up")
    right = right / nr
    down = np.cross(forward, right)
    rotation = np.stack([right, down, forward])
    translation = -rotation @ position
    return rotation, translation


def camera_ring(
    n_views: int,
    image_size: tuple[int, int],
    radius: float = 4600.0,
    height: float = 1300.0,
    target=(0.0, 0.0, 850.0),
    focal: float = 85.0,
) -> list[Camera]:
    """Evenly spaced cameras on a circle, all aimed at a common target."""
    h, w = image_size
    pp = np.array([(w - 1) / 2.0, (h - 1) / 2.0])
    cams = []
    for v in range(n_views):
        az = 2.0 * np.pi * v / n_views
        pos = np.array([radius * np.cos(az), radius * np.sin(az), height])
        rot, trans = look_at(pos, np.asarray(target))
        cams.append(Camera(rot, trans, focal, pp, (h, w)))
    return cams


def relative_rotation(cam_from: Camera, cam_to: Camera) -> np.ndarray:
    """Rotation taking directions in ``cam_from``'s frame to ``cam_to``'s."""
    return cam_to.rotation @ cam_from.rotation.T
