import pytest

from inner_clt.catalog import Catalog


@pytest.fixture(scope="module")
def catalog():
    return Catalog()


@pytest.mark.parametrize("name", Catalog().product_names())
def test_listed_multiplier_matches_product(catalog, name):
    entry = next(e for e in catalog.products if e["name"] == name)
    f = catalog.get_product("name", name)
    assert abs(abs(f.multiplier) - entry["a"]) < 1e-12


def test_degrees_two_to_five(catalog):
    degrees = {f.degree for _, f in catalog.default_products()}
    assert degrees == {2, 3, 4, 5}


def test_lookup_by_multiplier(catalog):
    f = catalog.get_product("a", 0.21)
    assert f.degree == 3


def test_invalid_key(catalog):
    with pytest.raises(ValueError, match="Invalid key"):
        catalog.get_product("degree", 2)


def test_unknown_product(catalog):
    with pytest.raises(ValueError):
        catalog.get_product("name", "heptic")


def test_sequences(catalog):
    assert catalog.get_sequence("harmonic")[4] == 0.25
    assert catalog.get_sequence("doubling")[3] == 8
    assert not catalog.get_sequence("linear").is_summable
    with pytest.raises(ValueError):
        catalog.get_sequence("fibonacci")
