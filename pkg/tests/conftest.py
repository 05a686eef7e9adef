import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from ctm.corpus import BowDocument
from ctm.model import CtmModel
from ctm.numerics import SpdMatrix


def random_ctm(k, v, seed, mu_scale=0.5, cov_scale=0.3):
    """A random well-conditioned CTM for oracle comparisons."""
    rng = np.random.default_rng(seed)
    topics = rng.dirichlet(np.ones(v), size=k)
    mu = mu_scale * rng.standard_normal(k)
    a = cov_scale * rng.standard_normal((k, k))
    sigma = a @ a.T + np.eye(k)
    return CtmModel(np.log(topics), mu, SpdMatrix(sigma))


def random_doc(v, n_terms, seed, max_count=4):
    rng = np.random.default_rng(seed)
    ids = sorted(rng.choice(v, size=min(n_terms, v), replace=False).tolist())
    return BowDocument(
        f"rnd{seed}", [(int(t), int(rng.integers(1, max_count + 1))) for t in ids]
    )


@pytest.fixture(scope="session")
def tiny_model():
    return random_ctm(2, 3, seed=11)
