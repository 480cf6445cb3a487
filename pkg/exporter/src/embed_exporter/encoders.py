"""Joint image/text encoder backends.

Two backends live behind a ``scheme:name`` model identifier:

``builtin:palette-v1``
    A deterministic, dependency-light joint encoder. Images and captions
    are mapped into a shared space built from hash-seeded unit directions:
    color words in a caption and dominant saturated colors in an image pull
    toward the same ``color:<name>`` direction, so genuinely paired
    image/caption rows score higher cosine than mismatched ones. Useful for
    pipelines that need real cross-modal structure without model weights.

``clip:<checkpoint-or-path>``
    A CLIP checkpoint loaded through ``transformers`` (optional extra).
    Vectors come from the model's own projection heads and are emitted
    unnormalized.

Both backends expose ``encode_images(list of PIL images)`` and
``encode_texts(list of str)`` returning float64 arrays of shape
``(batch, dim)``, plus ``dim`` and ``model_id`` attributes.
"""

from __future__ import annotations

import hashlib
import re
from functools import lru_cache

import numpy as np

from .errors import ModelLoadFailure

DEFAULT_MODEL = "builtin:palette-v1"

# shared vocabulary that ties the two modalities together
_LEXICON: dict[str, tuple[int, int, int]] = {
    "red": (220, 40, 40),
    "green": (40, 180, 60),
    "blue": (40, 70, 220),
    "yellow": (230, 220, 50),
    "orange": (240, 150, 40),
    "purple": (150, 60, 200),
    "pink": (240, 130, 180),
    "brown": (140, 90, 50),
    "cyan": (60, 210, 220),
    "magenta": (220, 60, 200),
    "teal": (40, 140, 140),
    "black": (20, 20, 20),
    "white": (245, 245, 245),
    "gray": (128, 128, 128),
}
_SPREAD_MIN = 30.0
# only colors the saturation mask can actually detect are match candidates
_SATURATED = tuple(
    name for name, rgb in _LEXICON.items() if max(rgb) - min(rgb) >= _SPREAD_MIN
)

_COLOR_WEIGHT = 3.0
_TOKEN_WEIGHT = 0.5
_STAT_WEIGHT = 1.0
_ANCHOR_WEIGHT = 0.25

_TOKEN_RE = re.compile(r"[a-z0-9]+")


@lru_cache(maxsize=8192)
def _direction(token: str, dim: int) -> np.ndarray:
    """Unit vector pinned to the token, identical across runs and processes."""
    digest = hashlib.sha256(token.encode("utf-8")).digest()
    rng = np.random.default_rng(int.from_bytes(digest[:8], "big"))
    v = rng.standard_normal(dim)
    return v / np.linalg.norm(v)


def _projection(model_id: str, dim: int) -> np.ndarray:
    """Orthogonal head shared by both modalities, seeded from the model id."""
    digest = hashlib.sha256(model_id.encode("utf-8")).digest()
    rng = np.random.default_rng(int.from_bytes(digest[8:16], "big"))
    q, r = np.linalg.qr(rng.standard_normal((dim, dim)))
    return q * np.sign(np.diag(r))


def _dominant_color(arr: np.ndarray) -> str | None:
    """Nearest lexicon color to the mean of sufficiently saturated pixels."""
    spread = arr.max(axis=2) - arr.min(axis=2)
    mask = spread >= _SPREAD_MIN
    if mask.mean() < 0.02:
        return None
    mean_rgb = arr[mask].mean(axis=0)
    distances = {
        name: float(np.linalg.norm(mean_rgb - np.asarray(_LEXICON[name], dtype=np.float64)))
        for name in _SATURATED
    }
    return min(distances, key=distances.get)


class BuiltinBackend:
    """Hash-direction joint encoder; no weights, fully deterministic."""

    def __init__(self, model_id: str = DEFAULT_MODEL, dim: int = 64):
        if dim < 8:
            raise ModelLoadFailure(f"builtin encoder needs dim >= 8, got {dim}")
        self.model_id = model_id
        self.dim = int(dim)
        self.device = "cpu"
        self._head = _projection(model_id, self.dim)

    def _image_vec(self, image) -> np.ndarray:
        arr = np.asarray(image.convert("RGB"), dtype=np.float64)
        luma = arr @ np.array([0.299, 0.587, 0.114])
        # anchor keeps even degenerate inputs (all-black frame) off the origin
        vec = _ANCHOR_WEIGHT * _direction("anchor:image", self.dim)
        vec = vec + _STAT_WEIGHT * (luma.mean() / 255.0) * _direction("stat:brightness", self.dim)
        vec = vec + _STAT_WEIGHT * (luma.std() / 255.0) * _direction("stat:texture", self.dim)
        for channel, name in enumerate(("stat:red-mean", "stat:green-mean", "stat:blue-mean")):
            vec = vec + _STAT_WEIGHT * (arr[..., channel].mean() / 255.0) * _direction(name, self.dim)
        color = _dominant_color(arr)
        if color is not None:
            vec = vec + _COLOR_WEIGHT * _direction("color:" + color, self.dim)
        return vec

    def _text_vec(self, text: str) -> np.ndarray:
        vec = _ANCHOR_WEIGHT * _direction("anchor:text", self.dim)
        for token in _TOKEN_RE.findall(text.lower()):
            vec = vec + _TOKEN_WEIGHT * _direction("tok:" + token, self.dim)
            if token in _LEXICON:
                vec = vec + _COLOR_WEIGHT * _direction("color:" + token, self.dim)
        return vec

    # the head is applied per row so batch composition cannot perturb
    # low-order bits; identical inputs embed byte-identically at any batch size
    def encode_images(self, images) -> np.ndarray:
        return np.stack([self._image_vec(img) @ self._head for img in images])

    def encode_texts(self, texts) -> np.ndarray:
        return np.stack([self._text_vec(t) @ self._head for t in texts])


class ClipBackend:
    """CLIP via transformers; projection-head outputs, unnormalized."""

    def __init__(self, checkpoint: str, device: str = "cpu"):
        try:
            import torch
            from transformers import CLIPModel, CLIPProcessor
        except Exception as exc:
            raise ModelLoadFailure(
                f"clip backend needs the transformers and torch packages: {exc}"
            ) from exc
        try:
            self._model = CLIPModel.from_pretrained(checkpoint).to(device).eval()
            self._processor = CLIPProcessor.from_pretrained(checkpoint)
        except Exception as exc:
            raise ModelLoadFailure(f"cannot load clip checkpoint {checkpoint!r}: {exc}") from exc
        self._torch = torch
        self.model_id = "clip:" + checkpoint
        self.dim = int(self._model.config.projection_dim)
        self.device = device

    def encode_images(self, images) -> np.ndarray:
        inputs = self._processor(images=list(images), return_tensors="pt").to(self.device)
        with self._torch.no_grad():
            feats = self._model.get_image_features(**inputs)
        return feats.cpu().numpy().astype(np.float64)

    def encode_texts(self, texts) -> np.ndarray:
        inputs = self._processor(
            text=list(texts), return_tensors="pt", padding=True, truncation=True
        ).to(self.device)
        with self._torch.no_grad():
            feats = self._model.get_text_features(**inputs)
        return feats.cpu().numpy().astype(np.float64)


def load_backend(model_id: str, device: str = "cpu", dim: int = 64):
    """Resolve a ``scheme:name`` identifier to a ready backend.

    ``dim`` applies to the builtin backend only; CLIP models carry their own
    projection width.
    """
    scheme, sep, rest = model_id.partition(":")
    if not sep:
        raise ModelLoadFailure(f"model id {model_id!r} needs the form scheme:name")
    if scheme == "builtin":
        if rest != "palette-v1":
            raise ModelLoadFailure(f"unknown builtin encoder {rest!r}")
        return BuiltinBackend(model_id=model_id, dim=dim)
    if scheme == "clip":
        if not rest:
            raise ModelLoadFailure("clip scheme needs a checkpoint id or path")
        return ClipBackend(rest, device=device)
    raise ModelLoadFailure(f"unknown model scheme {scheme!r}")
