import json

import numpy as np
import pytest

from tensor_store.archive import Tensor, TensorArchive, write_archive


@pytest.fixture
def write_weights(tmp_path):
    """Write {name: array} as a GFXT archive and return its path."""
    def write(filename, tensors):
        archive = TensorArchive()
        for name, data in tensors.items():
            archive.add(Tensor(name, np.asarray(data, dtype=np.float64)))
        path = tmp_path / filename
        write_archive(archive, path)
        return path
    return write


@pytest.fixture
def write_manifest(tmp_path):
    def write(manifest, filename="manifest.json"):
        path = tmp_path / filename
        path.write_text(json.dumps(manifest))
        return path
    return write


@pytest.fixture
def model_pair(rng, write_weights):
    """Base/target archives over the given manifest layers, plus one unselected tensor."""
    def make(manifest, shape=(12, 10), scale=0.05):
        base, target = {"embed": rng.standard_normal((4, 3))}, {}
        for layer in manifest["layers"]:
            w0 = rng.standard_normal(shape)
            base[layer["name"]] = w0
            target[layer["name"]] = w0 + scale * rng.standard_normal(shape)
        target["embed"] = base["embed"]
        return write_weights("base.gfxt", base), write_weights("target.gfxt", target)
    return make
