import functools

import pytest

from treewidth.builder import BuildConfig, build, build_flat_torus, build_genus_surface, build_round_sphere


@functools.lru_cache(maxsize=None)
def glued(variant: str, h: int, R: int):
    return build(BuildConfig(variant=variant, h=h, R=R))


@pytest.fixture(scope="session")
def sphere8():
    return build_round_sphere(8)


@pytest.fixture(scope="session")
def torus16():
    return build_flat_torus(16)


@pytest.fixture(scope="session")
def genus2():
    return build_genus_surface(2, 8)
