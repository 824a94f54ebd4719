"""Pre-trained encoder adapters.

Each adapter turns a list of media paths into an (n, d) float32 matrix of
raw embeddings (no L2 normalization: the retrieval pipeline owns all
preprocessing). Heavy dependencies are imported lazily so that the
manifest/format machinery works without torch installed.

The pooling choice per encoder is recorded here and echoed into the
output sidecar, since different checkpoints default to class-token or
mean pooling.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Callable, Protocol

import numpy as np

log = logging.getLogger(__name__)


class Encoder(Protocol):
    model_id: str
    pooling: str

    def embed_files(self, paths: list[str]) -> np.ndarray: ...


@dataclass
class HubVisionEncoder:
    """Vision transformer loaded from torch.hub / transformers."""

    model_id: str
    loader: Callable
    pooling: str
    device: str = "cpu"
    batch_size: int = 16

    def __post_init__(self):
        self._model = None

    def _ensure_model(self):
        if self._model is None:
            self._model = self.loader(self.device)
        return self._model

    def embed_files(self, paths: list[str]) -> np.ndarray:
        import torch
        from PIL import Image

        model, preprocess = self._ensure_model()
        chunks = []
        with torch.no_grad():
            for start in range(0, len(paths), self.batch_size):
                batch_paths = paths[start : start + self.batch_size]
                images = [Image.open(p).convert("RGB") for p in batch_paths]
                batch = torch.stack([preprocess(im) for im in images]).to(self.device)
                feats = model(batch)
                chunks.append(feats.cpu().numpy().astype(np.float32))
        return np.concatenate(chunks, axis=0)


def _load_dinov2(variant: str):
    def loader(device: str):
        import torch
        from torchvision import transforms

        model = torch.hub.load("facebookresearch/dinov2", variant)
        model.eval().to(device)
        preprocess = transforms.Compose([
            transforms.Resize(256),
            transforms.CenterCrop(224),
            transforms.ToTensor(),
            transforms.Normalize((0.485, 0.456, 0.406), (0.229, 0.224, 0.225)),
        ])
        return model, preprocess

    return loader


def _load_clip_vision(checkpoint: str):
    def loader(device: str):
        import torch
        from transformers import AutoImageProcessor, AutoModel

        processor = AutoImageProcessor.from_pretrained(checkpoint)
        model = AutoModel.from_pretrained(checkpoint).eval().to(device)

        def preprocess(image):
            return processor(images=image, return_tensors="pt")["pixel_values"][0]

        def forward(batch):
            return model.get_image_features(pixel_values=batch)

        return forward, preprocess

    return loader


@dataclass
class HFAudioEncoder:
    """Audio encoder via a transformers feature extractor + model."""

    model_id: str
    checkpoint: str
    pooling: str
    device: str = "cpu"
    batch_size: int = 8
    sample_rate: int = 16_000

    def embed_files(self, paths: list[str]) -> np.ndarray:
        import soundfile as sf
        import torch
        from transformers import AutoFeatureExtractor, AutoModel

        extractor = AutoFeatureExtractor.from_pretrained(self.checkpoint)
        model = AutoModel.from_pretrained(self.checkpoint).eval().to(self.device)
        chunks = []
        with torch.no_grad():
            for start in range(0, len(paths), self.batch_size):
                waves = []
                for p in paths[start : start + self.batch_size]:
                    audio, _ = sf.read(p, dtype="float32")
                    if audio.ndim > 1:
                        audio = audio.mean(axis=1)
                    waves.append(audio)
                inputs = extractor(waves, sampling_rate=self.sample_rate,
                                   return_tensors="pt", padding=True)
                inputs = {k: v.to(self.device) for k, v in inputs.items()}
                hidden = model(**inputs).last_hidden_state
                chunks.append(hidden.mean(dim=1).cpu().numpy().astype(np.float32))
        return np.concatenate(chunks, axis=0)


# model id -> factory(device, batch_size) -> Encoder
REGISTRY: dict[str, Callable[[str, int], Encoder]] = {
    "dinov2": lambda device, bs: HubVisionEncoder(
        "dinov2", _load_dinov2("dinov2_vitb14"), pooling="class-token",
        device=device, batch_size=bs),
    "simdinov2": lambda device, bs: HubVisionEncoder(
        "simdinov2", _load_dinov2("dinov2_vitb14_reg"), pooling="class-token",
        device=device, batch_size=bs),
    "dfn": lambda device, bs: HubVisionEncoder(
        "dfn", _load_clip_vision("apple/DFN2B-CLIP-ViT-B-16"),
        pooling="projected-class-token", device=device, batch_size=bs),
    "clap": lambda device, bs: HFAudioEncoder(
        "clap", "laion/clap-htsat-unfused", pooling="mean", device=device,
        batch_size=bs, sample_rate=48_000),
    "dasheng": lambda device, bs: HFAudioEncoder(
        "dasheng", "mispeech/dasheng-base", pooling="mean", device=device,
        batch_size=bs),
    "ced": lambda device, bs: HFAudioEncoder(
        "ced", "mispeech/ced-base", pooling="mean", device=device,
        batch_size=bs),
}


def get_encoder(model_id: str, device: str = "cpu", batch_size: int = 16) -> Encoder:
    try:
        factory = REGISTRY[model_id.lower()]
    except KeyError:
        known = ", ".join(sorted(REGISTRY))
        raise ValueError(f"unknown model id {model_id!r} (known: {known})")
    return factory(device, batch_size)
