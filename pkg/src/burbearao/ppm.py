"""Minimal 8-bit PPM (P3/P6) reading and writing."""

from __future__ import annotations

import numpy as np

from .errors import DomainError


def _tokens(data: bytes, count: int, pos: int) -> tuple[list[bytes], int]:
    out = []
    n = len(data)
    while len(out) < count:
        while pos < n and data[pos : pos + 1].isspace():
            pos += 1
        if pos < n and data[pos : pos + 1] == b"#":
            while pos < n and data[pos : pos + 1] not in (b"\n", b"\r"):
                pos += 1
            continue
        start = pos
        while pos < n and not data[pos : pos + 1].isspace() and data[pos : pos + 1] != b"#":
            pos += 1
        if start == pos:
            raise DomainError("truncated PPM header")
        out.append(data[start:pos])
    return out, pos


def read_ppm(path) -> np.ndarray:
    """Return an (height, width, 3) uint8 array."""
    with open(path, "rb") as fh:
        data = fh.read()
    magic = data[:2]
    if magic not in (b"P3", b"P6"):
        raise DomainError(f"unsupported image format {magic!r}; expected PPM P3 or P6")
    try:
        (w, h, maxval), pos = _tokens(data, 3, 2)
        w, h, maxval = int(w), int(h), int(maxval)
    except ValueError as exc:
        raise DomainError(f"bad PPM header: {exc}") from exc
    if w < 1 or h < 1 or not 0 < maxval <= 255:
        raise DomainError(f"only 8-bit PPM is supported (width={w}, height={h}, maxval={maxval})")
    count = w * h * 3
    if magic == b"P6":
        pos += 1  # single whitespace byte after maxval
        raw = np.frombuffer(data[pos : pos + count], dtype=np.uint8)
        if raw.size != count:
            raise DomainError("truncated PPM pixel data")
    else:
        try:
            toks, _ = _tokens(data, count, pos)
            raw = np.array([int(t) for t in toks], dtype=np.int64)
        except ValueError as exc:
            raise DomainError(f"bad PPM pixel data: {exc}") from exc
        if np.any(raw < 0) or np.any(raw > maxval):
            raise DomainError("PPM sample out of range")
    img = raw.reshape(h, w, 3).astype(np.float64)
    if maxval != 255:
        img = np.round(img * 255.0 / maxval)
    return img.astype(np.uint8)


def write_ppm(path, img: np.ndarray, binary: bool = True):
    img = np.asarray(img, dtype=np.uint8)
    h, w, _ = img.shape
    with open(path, "wb") as fh:
        if binary:
            fh.write(b"P6\n%d %d\n255\n" % (w, h))
            fh.write(img.tobytes())
        else:
            fh.write(b"P3\n%d %d\n255\n" % (w, h))
            for row in img:
                fh.write((" ".join(str(int(v)) for v in row.reshape(-1)) + "\n").encode())


def image_to_points(img: np.ndarray, xy_scale: float = 1.0) -> np.ndarray:
    """One (R, G, B, x, y) row per pixel in row-major order, all scaled to [0, 1].

    ``xy_scale`` multiplies the normalized coordinates.
    """
    h, w, _ = img.shape
    rgb = img.reshape(-1, 3).astype(np.float64) / 255.0
    ys, xs = np.mgrid[0:h, 0:w]
    x = xs.reshape(-1) / (w - 1) if w > 1 else np.zeros(h * w)
    y = ys.reshape(-1) / (h - 1) if h > 1 else np.zeros(h * w)
    return np.column_stack([rgb, xy_scale * x, xy_scale * y])


def ingest_image(path, xy_scale: float = 1.0) -> np.ndarray:
    return image_to_points(read_ppm(path), xy_scale)
