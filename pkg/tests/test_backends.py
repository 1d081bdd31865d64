"""Numba kernels and their numpy fallbacks must give identical results."""
import json
import os
import subprocess
import sys

import pytest

SCRIPT = r"""
import json
import numpy as np
from dirinfo import backend_name, fp_cmi, infer_graph, simulate_var, InferenceConfig, EmbeddingSpec
from dirinfo.gaussian_oracle import ring_model
ts = simulate_var(ring_model(), 800, seed=2)
rng = np.random.default_rng(1)
x, y, z = rng.standard_normal((3, 600, 2))
cfg = InferenceConfig(spec=EmbeddingSpec.uniform(2), n_surrogates=19, seed=1, list_size=16)
g = infer_graph(ts, cfg)
print(json.dumps({
    "backend": backend_name(),
    "sim": ts.values[::97].tolist(),
    "cmi": fp_cmi(x, y + x, z),
    "graph": g.to_dict(),
    "nulls": [r.null.tolist() for _, r in sorted(g.results.items())],
}))
"""


def run_with(flag):
    env = dict(os.environ)
    env.pop("DIRINFO_DISABLE_NUMBA", None)
    if flag is not None:
        env["DIRINFO_DISABLE_NUMBA"] = flag
    proc = subprocess.run([sys.executable, "-c", SCRIPT], capture_output=True, text=True,
                          env=env, check=True)
    return json.loads(proc.stdout)


@pytest.fixture(scope="module")
def numba_run():
    return run_with(None)


@pytest.mark.parametrize("flag", ["1", "true"])
def test_fallback_matches_numba(numba_run, flag):
    fallback = dict(run_with(flag))
    reference = dict(numba_run)
    assert reference.pop("backend") == "numba"
    assert fallback.pop("backend") == "numpy"
    assert fallback == reference


def test_falsy_flag_keeps_numba():
    assert run_with("0")["backend"] == "numba"
