"""Deterministic multi-view, multi-subject dataset generation and access.

A dataset directory holds lossless 8-bit PNG frames, one binary mask PNG
per frame, a background bank, a copy of the world config, and a JSONL
manifest whose first line carries the dataset-level fields (seed, config,
format version) followed by one record per frame. Regenerating from the
stored seed and config reproduces every file bit-exactly.
"""
from __future__ import annotations

from dataclasses import dataclass, field, asdict
from pathlib import Path

import numpy as np

from . import ioutil
from .camera import Camera, camera_ring, relative_rotation, world_to_camera
from .errors import ConfigError, DomainError, FigureOutOfFrame
from .rendering import (AppearanceSpec, Frame, make_background, render,
                        sample_appearance)
from .skeleton import (SkeletonConfig, SkeletonPose, default_actions,
                       default_skeleton, sample_angle_sequence)

MANIFEST_VERSION = 1
SPLITS = ("ssl-train", "regressor-train", "test")

# RNG stream tags; every random draw derives from (seed, tag, *ids).
_TAG_BACKGROUND = 1
_TAG_APPEARANCE = 2
_TAG_SEQUENCE = 3


@dataclass
class WorldConfig:
    """Everything the generator needs; serializable to/from plain YAML."""

    n_subjects: int = 4
    n_actions: int = 2
    n_views: int = 2
    sequence_length: int = 60
    image_size: int = 64
    keyframe_every: int = 5
    max_step_delta: float = 0.05
    margin: float = 3.0
    thickness_range: tuple[float, float] = (2.0, 5.0)
    body_scale_range: tuple[float, float] = (0.8, 1.2)
    split_fractions: tuple[float, float, float] = (0.7, 0.15, 0.15)
    camera_radius: float = 4600.0
    camera_height: float = 1300.0
    camera_target_height: float = 850.0
    focal: float = 80.0
    root_walk_extent: float = 200.0
    root_walk_sigma: float = 40.0
    yaw_sigma: float = 0.08

    def __post_init__(self):
        self.thickness_range = tuple(self.thickness_range)
        self.body_scale_range = tuple(self.body_scale_range)
        self.split_fractions = tuple(self.split_fractions)
        if min(self.n_subjects, self.n_actions, self.n_views,
               self.sequence_length) < 1:
            raise ConfigError("subject/action/view/sequence counts must be >= 1")
        if self.image_size < 16:
            raise ConfigError("image_size must be >= 16")
        if abs(sum(self.split_fractions) - 1.0) > 1e-9:
            raise ConfigError("split_fractions must sum to 1")
        if any(f < 0 for f in self.split_fractions):
            raise ConfigError("split_fractions must be nonnegative")
        if self.max_step_delta <= 0 or self.keyframe_every < 1:
            raise ConfigError("invalid smoothness settings")

    def to_dict(self) -> dict:
        d = asdict(self)
        d["thickness_range"] = list(self.thickness_range)
        d["body_scale_range"] = list(self.body_scale_range)
        d["split_fractions"] = list(self.split_fractions)
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "WorldConfig":
        return cls(**d)


@dataclass
class FrameRecord:
    """One manifest line: file paths plus all frame metadata."""

    image: str
    mask: str
    background: str
    subject_id: int
    action_id: int
    view_id: int
    time_index: int
    split: str
    pose3d: list            # (J, 3) world joints
    joint_angles: list
    root_position: list
    root_yaw: float
    camera: dict
    appearance: dict
    image_sha256: str
    mask_sha256: str

    def to_dict(self) -> dict:
        d = asdict(self)
        d["record"] = "frame"
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "FrameRecord":
        d = {k: v for k, v in d.items() if k != "record"}
        return cls(**d)


@dataclass
class DatasetManifest:
    seed: int
    world_config: WorldConfig
    config_hash: str
    records: list[FrameRecord] = field(default_factory=list)
    version: int = MANIFEST_VERSION

    def split_indices(self, split: str) -> list[int]:
        if split not in SPLITS:
            raise ConfigError(f"unknown split {split!r}")
        return [i for i, r in enumerate(self.records) if r.split == split]

    def save(self, path: str | Path) -> None:
        header = {
            "record": "header",
            "version": self.version,
            "seed": self.seed,
            "world_config": self.world_config.to_dict(),
            "config_hash": self.config_hash,
            "n_frames": len(self.records),
        }
        ioutil.write_jsonl(path, [header] + [r.to_dict() for r in self.records])

    @classmethod
    def load(cls, path: str | Path, check_files: bool = True) -> "DatasetManifest":
        rows = ioutil.read_jsonl(path)
        if not rows or rows[0].get("record") != "header":
            raise ConfigError(f"{path}: missing manifest header line")
        header = rows[0]
        if header["version"] != MANIFEST_VERSION:
            raise ConfigError(
                f"manifest version {header['version']} unsupported")
        manifest = cls(
            seed=header["seed"],
            world_config=WorldConfig.from_dict(header["world_config"]),
            config_hash=header["config_hash"],
            records=[FrameRecord.from_dict(r) for r in rows[1:]],
            version=header["version"],
        )
        if len(manifest.records) != header["n_frames"]:
            raise ConfigError("manifest frame count mismatch")
        if check_files:
            root = Path(path).parent
            for r in manifest.records:
                for rel in (r.image, r.mask, r.background):
                    if not (root / rel).exists():
                        raise ConfigError(f"missing dataset file {rel}")
        return manifest


def _interp_keyframe_walk(start, sigma, bound, length, keyframe_every, rng,
                          center=None):
    """Bounded keyframe random walk with linear in-between interpolation."""
    start = np.atleast_1d(np.asarray(start, dtype=np.float64))
    n_key = int(np.ceil((length - 1) / keyframe_every)) + 1 if length > 1 else 1
    keys = np.zeros((n_key,) + start.shape)
    keys[0] = start
    for k in range(1, n_key):
        step = rng.normal(0, sigma, size=start.shape)
        if center is not None:
            step = step + 0.1 * (center - keys[k - 1])
        keys[k] = np.clip(keys[k - 1] + step, -bound, bound)
    out = np.zeros((length,) + start.shape)
    for t in range(length):
        k, frac = divmod(t, keyframe_every)
        if k + 1 >= n_key:
            out[t] = keys[-1]
        else:
            w = frac / keyframe_every
            out[t] = (1 - w) * keys[k] + w * keys[k + 1]
    return out


def _render_sequence(config, skeleton, action, appearance, cameras,
                     backgrounds, subject, rng):
    """Render all (time, view) frames of one sequence, or raise to retry."""
    length = config.sequence_length
    angles = sample_angle_sequence(action, skeleton, length, rng,
                                   config.keyframe_every, config.max_step_delta)
    root_height = skeleton.scaled(appearance.body_scale).standing_root_height()
    xy0 = rng.uniform(-0.5 * config.root_walk_extent,
                      0.5 * config.root_walk_extent, size=2)
    xy = _interp_keyframe_walk(xy0, config.root_walk_sigma,
                               config.root_walk_extent, length,
                               config.keyframe_every, rng,
                               center=np.zeros(2))
    yaw0 = rng.uniform(0, 2 * np.pi)
    yaw = yaw0 + _interp_keyframe_walk(0.0, config.yaw_sigma, np.pi, length,
                                       config.keyframe_every, rng)[:, 0]
    frames = []
    for t in range(length):
        pose = SkeletonPose(angles[t],
                            np.array([xy[t, 0], xy[t, 1], root_height]),
                            float(yaw[t]))
        per_view = []
        for v, cam in enumerate(cameras):
            per_view.append(render(
                pose, appearance, cam, backgrounds[v], skeleton,
                margin=config.margin, subject_id=subject,
                action_id=action.action_id, view_id=v, time_index=t))
        frames.append((pose, per_view))
    return frames


def _split_for_time(t: int, length: int, fractions) -> str:
    n_ssl = int(np.floor(length * fractions[0]))
    n_reg = int(np.floor(length * fractions[1]))
    if t < n_ssl:
        return SPLITS[0]
    if t < n_ssl + n_reg:
        return SPLITS[1]
    return SPLITS[2]


def generate_dataset(config: WorldConfig, seed: int,
                     out_dir: str | Path) -> DatasetManifest:
    """Generate frames, masks, backgrounds and the manifest under out_dir.

    Deterministic: every random draw comes from a stream derived from
    (seed, purpose tag, subject/action/view ids), so identical (config,
    seed) pairs produce bit-identical files. Sequences whose figure leaves
    the frame margin are resampled wholesale, preserving smoothness.
    """
    out = Path(out_dir)
    for sub in ("frames", "masks", "backgrounds"):
        (out / sub).mkdir(parents=True, exist_ok=True)

    skeleton = default_skeleton()
    actions = default_actions(config.n_actions, skeleton)
    size = (config.image_size, config.image_size)
    cameras = camera_ring(config.n_views, size, config.camera_radius,
                          config.camera_height,
                          (0, 0, config.camera_target_height), config.focal)

    backgrounds = {}
    for s in range(config.n_subjects):
        for v in range(config.n_views):
            rng = np.random.default_rng([seed, _TAG_BACKGROUND, s, v])
            bg = make_background(size, rng)
            rel = f"backgrounds/bg{s * config.n_views + v:03d}.png"
            ioutil.save_image_png(out / rel, bg)
            backgrounds[(s, v)] = rel

    appearances = {}
    for s in range(config.n_subjects):
        rng = np.random.default_rng([seed, _TAG_APPEARANCE, s])
        appearances[s] = sample_appearance(
            rng, len(skeleton.bones), config.thickness_range,
            config.body_scale_range, background_id=s * config.n_views)

    records: list[FrameRecord] = []
    for s in range(config.n_subjects):
        # compose over the quantized background actually stored on disk, so
        # stored frames match it bit-exactly outside the figure mask
        bg_pixels = {v: ioutil.load_image_png(out / backgrounds[(s, v)])
                     for v in range(config.n_views)}
        for action in actions:
            for attempt in range(64):
                rng = np.random.default_rng(
                    [seed, _TAG_SEQUENCE, s, action.action_id, attempt])
                try:
                    seq = _render_sequence(
                        config, skeleton, action, appearances[s], cameras,
                        bg_pixels, s, rng)
                    break
                except FigureOutOfFrame:
                    continue
            else:
                raise ConfigError(
                    "could not place the figure in frame after 64 attempts; "
                    "check camera/margin settings")
            for pose, per_view in seq:
                for frame in per_view:
                    stem = (f"s{s:02d}_a{action.action_id:02d}"
                            f"_t{frame.time_index:04d}_v{frame.view_id:02d}")
                    img_rel = f"frames/{stem}.png"
                    msk_rel = f"masks/{stem}.png"
                    ioutil.save_image_png(out / img_rel, frame.image)
                    ioutil.save_mask_png(out / msk_rel, frame.mask_gt)
                    records.append(FrameRecord(
                        image=img_rel,
                        mask=msk_rel,
                        background=backgrounds[(s, frame.view_id)],
                        subject_id=s,
                        action_id=action.action_id,
                        view_id=frame.view_id,
                        time_index=frame.time_index,
                        split=_split_for_time(frame.time_index,
                                              config.sequence_length,
                                              config.split_fractions),
                        pose3d=frame.pose3d_gt.tolist(),
                        joint_angles=pose.joint_angles.tolist(),
                        root_position=pose.root_position.tolist(),
                        root_yaw=float(pose.root_yaw),
                        camera=frame.camera.to_dict(),
                        appearance=frame.appearance.to_dict(),
                        image_sha256=ioutil.sha256_file(out / img_rel),
                        mask_sha256=ioutil.sha256_file(out / msk_rel),
                    ))

    manifest = DatasetManifest(
        seed=seed,
        world_config=config,
        config_hash=ioutil.config_hash(config.to_dict()),
        records=records,
    )
    manifest.save(out / "manifest.jsonl")
    ioutil.save_yaml(out / "world_config.yaml", config.to_dict())
    return manifest


@dataclass
class LoadedFrame:
    """A frame record with its pixel data pulled from disk."""

    index: int
    record: FrameRecord
    image: np.ndarray
    mask: np.ndarray
    background: np.ndarray

    @property
    def camera(self) -> Camera:
        return Camera.from_dict(self.record.camera)

    @property
    def pose3d(self) -> np.ndarray:
        return np.asarray(self.record.pose3d)


class FrameStore:
    """Loaded manifest plus cached pixel access and pairing indexes."""

    def __init__(self, root: str | Path, manifest: DatasetManifest | None = None):
        self.root = Path(root)
        self.manifest = manifest or DatasetManifest.load(self.root / "manifest.jsonl")
        self.config = self.manifest.world_config
        self._image_cache: dict[int, np.ndarray] = {}
        self._mask_cache: dict[int, np.ndarray] = {}
        self._bg_cache: dict[str, np.ndarray] = {}
        self._sequences: dict[tuple[int, int, int], list[int]] = {}
        self._by_time: dict[tuple[int, int, int], dict[int, int]] = {}
        for i, r in enumerate(self.records):
            self._sequences.setdefault(
                (r.subject_id, r.action_id, r.view_id), []).append(i)
            self._by_time.setdefault(
                (r.subject_id, r.action_id, r.time_index), {})[r.view_id] = i
        for key in self._sequences:
            self._sequences[key].sort(
                key=lambda i: self.records[i].time_index)

    @property
    def records(self) -> list[FrameRecord]:
        return self.manifest.records

    def __len__(self) -> int:
        return len(self.records)

    def image(self, i: int) -> np.ndarray:
        if i not in self._image_cache:
            self._image_cache[i] = ioutil.load_image_png(
                self.root / self.records[i].image)
        return self._image_cache[i]

    def mask(self, i: int) -> np.ndarray:
        if i not in self._mask_cache:
            self._mask_cache[i] = ioutil.load_mask_png(
                self.root / self.records[i].mask)
        return self._mask_cache[i]

    def background(self, i: int) -> np.ndarray:
        rel = self.records[i].background
        if rel not in self._bg_cache:
            self._bg_cache[rel] = ioutil.load_image_png(self.root / rel)
        return self._bg_cache[rel]

    def frame(self, i: int) -> LoadedFrame:
        return LoadedFrame(i, self.records[i], self.image(i), self.mask(i),
                           self.background(i))

    def camera(self, i: int) -> Camera:
        return Camera.from_dict(self.records[i].camera)

    def split_indices(self, split: str) -> list[int]:
        return self.manifest.split_indices(split)

    def sequence(self, subject: int, action: int, view: int) -> list[int]:
        return self._sequences[(subject, action, view)]

    def sequences(self) -> list[tuple[int, int, int]]:
        return sorted(self._sequences.keys())

    def views_at(self, subject: int, action: int, time: int) -> dict[int, int]:
        return self._by_time[(subject, action, time)]

    def relative_rotation(self, i_from: int, i_to: int) -> np.ndarray:
        return relative_rotation(self.camera(i_from), self.camera(i_to))

    def target_pose(self, i: int) -> np.ndarray:
        """Root-relative camera-frame joints, the regressor's target."""
        r = self.records[i]
        cam = world_to_camera(self.camera(i), np.asarray(r.pose3d))
        return cam - cam[0]
