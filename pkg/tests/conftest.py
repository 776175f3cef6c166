import pytest

import src.bryantverify as bv
import src.config as config
from src.families import FamilySpec, build_family, sample_domain, with_overrides

N_POINTS = 5


def load_spec(name: str, **changes) -> FamilySpec:
    spec = FamilySpec.load(config.DATA_DIR / name)
    return with_overrides(spec, **changes) if changes else spec


def domain_points(fam, n: int = N_POINTS, seed: int = 0):
    accept = (lambda z: bv.generic_point(fam, z)) if fam.case in (3, 4) else None
    return sample_domain(fam, n, seed, accept=accept)


@pytest.fixture(scope="module")
def flat_family():
    return build_family(load_spec("flat.json"))


@pytest.fixture(scope="module")
def bryant_family():
    return build_family(load_spec("bryant_case1.json"))


@pytest.fixture(scope="module")
def two_eigenvalue_family():
    return build_family(load_spec("case3_two_eigenvalues.json"))


@pytest.fixture(scope="module")
def order_one_family():
    return build_family(load_spec("case4_order_one.json"))


@pytest.fixture(scope="module")
def constant_roots_family():
    return build_family(load_spec("case4_constant_roots.json"))
