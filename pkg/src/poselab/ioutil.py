"""File-format helpers: lossless PNG frames, YAML configs, JSONL, CSV tables.

Every writer here is byte-deterministic for identical inputs, which the
pipeline's reproducibility guarantees rely on.
"""
from __future__ import annotations

import csv
import hashlib
import io
import json
from pathlib import Path

import numpy as np
import yaml
from PIL import Image


def save_image_png(path: str | Path, image: np.ndarray) -> None:
    """Write an H x W x 3 float image in [0, 1] as 8-bit RGB PNG."""
    arr = np.clip(np.asarray(image, dtype=np.float64), 0.0, 1.0)
    data = np.round(arr * 255.0).astype(np.uint8)
    Image.fromarray(data, mode="RGB").save(str(path), format="PNG")


def load_image_png(path: str | Path) -> np.ndarray:
    """Read an 8-bit RGB PNG back to H x W x 3 float32 in [0, 1]."""
    with Image.open(str(path)) as im:
        data = np.asarray(im.convert("RGB"), dtype=np.float32)
    return data / 255.0


def save_mask_png(path: str | Path, mask: np.ndarray) -> None:
    """Write an H x W binary mask as an 8-bit grayscale PNG (0 / 255)."""
    data = (np.asarray(mask) > 0).astype(np.uint8) * 255
    Image.fromarray(data, mode="L").save(str(path), format="PNG")


def load_mask_png(path: str | Path) -> np.ndarray:
    """Read a mask PNG back to H x W uint8 in {0, 1}."""
    with Image.open(str(path)) as im:
        data = np.asarray(im.convert("L"))
    return (data > 127).astype(np.uint8)


def sha256_file(path: str | Path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as f:
        for chunk in iter(lambda: f.read(1 << 20), b""):
            h.update(chunk)
    return h.hexdigest()


def sha256_bytes(data: bytes) -> str:
    return hashlib.sha256(data).hexdigest()


def sha256_array(arr: np.ndarray) -> str:
    arr = np.ascontiguousarray(arr)
    h = hashlib.sha256()
    h.update(str(arr.dtype).encode())
    h.update(str(arr.shape).encode())
    h.update(arr.tobytes())
    return h.hexdigest()


def canonical_json(obj) -> str:
    """JSON with sorted keys and no whitespace variance; used for hashing."""
    return json.dumps(obj, sort_keys=True, separators=(",", ":"))


def config_hash(obj) -> str:
    return sha256_bytes(canonical_json(obj).encode("utf-8"))


def load_yaml(path: str | Path) -> dict:
    with open(path, "r", encoding="utf-8") as f:
        data = yaml.safe_load(f)
    return data if data is not None else {}


def save_yaml(path: str | Path, data: dict) -> None:
    with open(path, "w", encoding="utf-8") as f:
        yaml.safe_dump(data, f, sort_keys=True)


def write_jsonl(path: str | Path, records: list[dict]) -> None:
    with open(path, "w", encoding="utf-8") as f:
        for rec in records:
            f.write(canonical_json(rec))
            f.write("\n")


def read_jsonl(path: str | Path) -> list[dict]:
    records = []
    with open(path, "r", encoding="utf-8") as f:
        for line in f:
            line = line.strip()
            if line:
                records.append(json.loads(line))
    return records


def format_cell(value) -> str:
    """Canonical cell formatting so identical runs emit identical bytes."""
    if isinstance(value, float) or isinstance(value, np.floating):
        return repr(float(value))
    return str(value)


def write_csv(path: str | Path, header: list[str], rows: list[list]) -> None:
    with open(path, "w", encoding="utf-8", newline="") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([format_cell(v) for v in row])


def read_csv(path: str | Path) -> tuple[list[str], list[list[str]]]:
    with open(path, "r", encoding="utf-8", newline="") as f:
        reader = csv.reader(f)
        rows = list(reader)
    if not rows:
        return [], []
    return rows[0], rows[1:]


def image_to_png_bytes(image: np.ndarray) -> bytes:
    buf = io.BytesIO()
    arr = np.clip(np.asarray(image, dtype=np.float64), 0.0, 1.0)
    Image.fromarray(np.round(arr * 255.0).astype(np.uint8), mode="RGB").save(
        buf, format="PNG"
    )
    return buf.getvalue()
