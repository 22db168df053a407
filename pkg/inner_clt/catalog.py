# catalog.py
import weave

from . import inner_core, sequences


class Catalog:
    """Named test products and coefficient sequences usable from config files."""

    def __init__(self):
        self.products = [
            {
                "name": "square",
                "phase_angle": 0.0,
                "zeros": [[0.0, 0.0], [0.0, 0.0]],
                "a": 0.0,
            },
            {
                "name": "half",
                "phase_angle": 0.0,
                "zeros": [[0.0, 0.0], [0.5, 0.0]],
                "a": 0.5,
            },
            {
                "name": "half_rotated",
                "phase_angle": 0.0,
                "zeros": [[0.0, 0.0], [0.25, 0.4330127018922193]],
                "a": 0.5,
            },
            {
                "name": "quadratic_035",
                "phase_angle": 0.0,
                "zeros": [[0.0, 0.0], [0.35, 0.0]],
                "a": 0.35,
            },
            {
                "name": "cubic_021",
                "phase_angle": 0.7,
                "zeros": [[0.0, 0.0], [0.7, 0.0], [0.0, 0.3]],
                "a": 0.21,
            },
            {
                "name": "cubic_035",
                "phase_angle": 0.0,
                "zeros": [[0.0, 0.0], [-0.5, 0.0], [0.0, 0.7]],
                "a": 0.35,
            },
            {
                "name": "quartic_flat",
                "phase_angle": 1.3,
                "zeros": [[0.0, 0.0], [0.0, 0.0], [0.5, 0.0], [0.0, -0.7]],
                "a": 0.0,
            },
            {
                "name": "quintic_flat",
                "phase_angle": 0.0,
                "zeros": [[0.0, 0.0], [0.0, 0.0], [0.0, 0.0], [0.3, 0.0], [-0.7, 0.0]],
                "a": 0.0,
            },
        ]

        self.sequences = [
            {"name": "constant", "kind": "constant", "params": {"c": 1.0}},
            {"name": "linear", "kind": "power", "params": {"p": 1.0}},
            {"name": "harmonic", "kind": "power", "params": {"p": -1.0}},
            {"name": "doubling", "kind": "geometric", "params": {"r": 2.0}},
            {"name": "halving", "kind": "geometric", "params": {"r": 0.5}},
        ]

    @weave.op()
    def get_product(self, key, value):
        if key in {"name", "a"}:
            for entry in self.products:
                if entry[key] == value:
                    return inner_core.from_spec(entry)
            raise ValueError(f"Couldn't find a product with {key} of {value}")
        else:
            raise ValueError(f"Invalid key: {key}")

    @weave.op()
    def get_sequence(self, name):
        for entry in self.sequences:
            if entry["name"] == name:
                return sequences.from_spec(entry)
        raise ValueError(f"Couldn't find a sequence named {name}")

    def product_names(self):
        return [entry["name"] for entry in self.products]

    def default_products(self):
        """The products the verification suite runs over."""
        return [(entry["name"], inner_core.from_spec(entry)) for entry in self.products]
