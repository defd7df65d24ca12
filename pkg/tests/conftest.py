import pytest

import worldgen


@pytest.fixture(scope="session")
def small_world(tmp_path_factory):
    """Three-country, one-product world for CLI mechanics tests."""
    root = tmp_path_factory.mktemp("small_world")
    manifest_path = worldgen.write_world(
        root,
        products=("olefins",),
        regions=("AAA", "CCC", "EEE"),
        typical_days=4,
        seed=7,
    )
    return manifest_path
