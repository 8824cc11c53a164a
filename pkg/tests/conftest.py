"""Shared fixtures: benchmark-scale model configurations."""

import pytest

from lrdnet.model import GeneratorConfig, random_model


def twelve_node_config(seed=1, **overrides):
    """12-node benchmark shape: 8 deterministic channels driven by 4 full-rank
    ones, 25 directed edges, one full-rank channel pinned to pure noise."""
    base = dict(
        m=8,
        l=4,
        degree_ml=2,
        degree_l=2,
        support_ml=18,
        support_l=7,
        coeff_min=0.5,
        coeff_max=0.9,
        max_rejections=500,
        rng_seed=seed,
        pure_noise=(4,),
    )
    base.update(overrides)
    return GeneratorConfig(**base)


def small_config(seed=0, **overrides):
    """Small, fast-to-estimate shape used by unit tests."""
    base = dict(
        m=2,
        l=3,
        degree_ml=2,
        degree_l=2,
        support_ml=3,
        support_l=4,
        coeff_min=0.4,
        coeff_max=0.7,
        max_rejections=300,
        rng_seed=seed,
    )
    base.update(overrides)
    return GeneratorConfig(**base)


@pytest.fixture
def twelve_node_model():
    return random_model(twelve_node_config(seed=7))


@pytest.fixture
def small_model():
    return random_model(small_config(seed=3))
