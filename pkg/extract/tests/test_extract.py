import hashlib

import numpy as np
import pytest

# the primary package validates the emitted files (S1)
from binhash import fileio as primary_io

from embed_extract.extract import ExtractError, ExtractJob, extract
from embed_extract.manifest import ManifestError, parse_manifest


class FakeEncoder:
    """Deterministic stand-in: embeds the sha256 of each file's bytes."""

    model_id = "fake"
    pooling = "none"

    def __init__(self, dim=12):
        self.dim = dim

    def embed_files(self, paths):
        rows = []
        for p in paths:
            digest = hashlib.sha256(open(p, "rb").read()).digest()
            seed = int.from_bytes(digest[:8], "little")
            rows.append(np.random.default_rng(seed).standard_normal(self.dim))
        return np.array(rows, dtype=np.float32)


@pytest.fixture
def media_dir(tmp_path):
    for i in range(4):
        (tmp_path / f"item{i}.bin").write_bytes(bytes([i]) * 32)
    manifest = tmp_path / "manifest.tsv"
    manifest.write_text(
        "# comment line\n"
        "item0.bin\t0\n"
        "item1.bin\t1,2\n"
        "item2.bin\t2\n"
        "item3.bin\t0,1,2\n"
    )
    return tmp_path


def make_job(media_dir, tmp_path, **kwargs):
    defaults = dict(
        model_id="fake", manifest_path=str(media_dir / "manifest.tsv"),
        n_classes=3, out_embeddings=str(tmp_path / "out.hbem"),
        out_labels=str(tmp_path / "out.hblb"),
    )
    defaults.update(kwargs)
    return ExtractJob(**defaults)


class TestExtract:
    def test_outputs_pass_primary_validators(self, media_dir, tmp_path):
        job = make_job(media_dir, tmp_path)
        hbem, hblb = extract(job, encoder=FakeEncoder())
        X = primary_io.read_hbem(hbem)
        labels = primary_io.read_hblb(hblb)
        assert X.shape == (4, 12)
        assert labels.n == 4 and labels.c == 3

    def test_row_order_matches_manifest(self, media_dir, tmp_path):
        job = make_job(media_dir, tmp_path)
        enc = FakeEncoder()
        hbem, hblb = extract(job, encoder=enc)
        X = primary_io.read_hbem(hbem)
        rows = parse_manifest(job.manifest_path, 3)
        expected = enc.embed_files([r.path for r in rows])
        assert np.array_equal(X, expected)
        labels = primary_io.read_hblb(hblb)
        assert set(np.flatnonzero(labels.row(1))) == {1, 2}
        assert set(np.flatnonzero(labels.row(3))) == {0, 1, 2}

    def test_deterministic(self, media_dir, tmp_path):
        job1 = make_job(media_dir, tmp_path)
        job2 = make_job(media_dir, tmp_path,
                        out_embeddings=str(tmp_path / "b.hbem"),
                        out_labels=str(tmp_path / "b.hblb"))
        extract(job1, encoder=FakeEncoder())
        extract(job2, encoder=FakeEncoder())
        a = open(job1.out_embeddings, "rb").read()
        b = open(job2.out_embeddings, "rb").read()
        assert a == b

    def test_sidecar_contents(self, media_dir, tmp_path):
        job = make_job(media_dir, tmp_path)
        extract(job, encoder=FakeEncoder())
        sidecar = open(job.resolved_sidecar()).read()
        assert "model_id: fake" in sidecar
        assert "pooling: none" in sidecar
        assert "dim: 12" in sidecar
        X = primary_io.read_hbem(job.out_embeddings)
        digest = hashlib.sha256(
            np.ascontiguousarray(X, dtype="<f4").tobytes()
        ).hexdigest()
        assert f"embedding_sha256: {digest}" in sidecar

    def test_unreadable_file_fatal_by_default(self, media_dir, tmp_path):
        (media_dir / "manifest.tsv").write_text("missing.bin\t0\nitem0.bin\t1\n")
        job = make_job(media_dir, tmp_path)
        with pytest.raises(ExtractError, match="unreadable"):
            extract(job, encoder=FakeEncoder())

    def test_unreadable_file_skipped_with_flag(self, media_dir, tmp_path):
        (media_dir / "manifest.tsv").write_text("missing.bin\t0\nitem0.bin\t1\n")
        job = make_job(media_dir, tmp_path, skip_unreadable=True)
        hbem, hblb = extract(job, encoder=FakeEncoder())
        assert primary_io.read_hbem(hbem).shape[0] == 1
        assert primary_io.read_hblb(hblb).n == 1


class TestManifest:
    def test_label_out_of_range(self, media_dir):
        (media_dir / "manifest.tsv").write_text("item0.bin\t5\n")
        with pytest.raises(ManifestError, match="class id 5"):
            parse_manifest(str(media_dir / "manifest.tsv"), 3)

    def test_missing_labels_rejected(self, media_dir):
        (media_dir / "manifest.tsv").write_text("item0.bin\t\n")
        with pytest.raises(ManifestError):
            parse_manifest(str(media_dir / "manifest.tsv"), 3)

    def test_bad_shape_rejected(self, media_dir):
        (media_dir / "manifest.tsv").write_text("item0.bin only-one-column\n")
        with pytest.raises(ManifestError, match="TAB"):
            parse_manifest(str(media_dir / "manifest.tsv"), 3)


@pytest.mark.skip(reason="reproduction-grade check needs CIFAR-10 plus "
                         "encoder weights; run manually with real dumps")
def test_reproduction_dinov2_cifar10():
    # with extracted CIFAR-10 embeddings, the 64-bit binary pipeline is
    # expected to land near 94.7 mAP@1000 over 10 seeds
    raise NotImplementedError
