# command_handler.py
import logging
import math
from dataclasses import dataclass, field

import jsonschema
import numpy as np
import weave
import yaml

from . import blocks, clark, clt_harness, correlations, inner_core, sequences
from .catalog import Catalog
from .circle_quad import uniform_grid
from .config import DEFAULT_T_GRID, SCHEMA_VERSION, TAIL_CF_GAP_THRESHOLD
from .errors import ConfigError, InnerCLTError
from .run_manager import config_digest

logger = logging.getLogger(__name__)

catalog = Catalog()

NUMBER_OR_PAIR = {
    "oneOf": [
        {"type": "number"},
        {"type": "array", "items": {"type": "number"}, "minItems": 2, "maxItems": 2},
    ]
}

PROPERTIES = {
    "schema_version": {
        "const": SCHEMA_VERSION,
        "description": "Config layout version; must be 1."
    },
    "product": {
        "description": "A catalog product name or an explicit Blaschke product.",
        "oneOf": [
            {"type": "string"},
            {
                "type": "object",
                "properties": {
                    "phase_angle": {"type": "number"},
                    "zeros": {
                        "type": "array",
                        "minItems": 1,
                        "items": {"type": "array", "items": {"type": "number"},
                                  "minItems": 2, "maxItems": 2}
                    }
                },
                "required": ["zeros"],
                "additionalProperties": False
            }
        ]
    },
    "sequence": {
        "description": "A catalog sequence name or {kind, params}.",
        "oneOf": [
            {"type": "string"},
            {
                "type": "object",
                "properties": {
                    "kind": {"type": "string", "enum": list(sequences.KINDS)},
                    "params": {
                        "type": "object",
                        "properties": {
                            "c": NUMBER_OR_PAIR,
                            "p": {"type": "number"},
                            "r": NUMBER_OR_PAIR,
                            "values": {"type": "array", "items": NUMBER_OR_PAIR},
                            "moduli": {"type": "array", "items": {"type": "number", "minimum": 0}},
                            "seed": {"type": "integer", "minimum": 0}
                        },
                        "additionalProperties": False
                    }
                },
                "required": ["kind"],
                "additionalProperties": False
            }
        ]
    },
    "N": {
        "description": "Number of terms, or an increasing list of them.",
        "oneOf": [
            {"type": "integer", "minimum": 1},
            {"type": "array", "items": {"type": "integer", "minimum": 1}, "minItems": 1}
        ]
    },
    "mode": {"type": "string", "enum": list(clt_harness.MODES)},
    "cutoff": {"type": "integer", "minimum": 1},
    "sampling": {
        "type": "object",
        "properties": {
            "kind": {"type": "string", "enum": ["grid", "mc"]},
            "M": {"type": "integer", "minimum": 1},
            "seed": {"type": "integer", "minimum": 0},
            "offset": {"type": "number"}
        },
        "additionalProperties": False
    },
    "t_grid": {"type": "array", "items": NUMBER_OR_PAIR, "minItems": 1},
    "thresholds": {
        "type": "object",
        "properties": {
            "cf_gap": {"type": "number", "exclusiveMinimum": 0},
            "ks_pvalue": {"type": "number", "minimum": 0, "maximum": 1},
            "cf_radius": {"type": "number", "exclusiveMinimum": 0}
        },
        "additionalProperties": False
    },
    "phi": {"type": "number", "exclusiveMinimum": 0, "maximum": 1},
    "n_alpha": {"type": "integer", "minimum": 1},
    "l_max": {"type": "integer", "minimum": 1, "maximum": clark.MAX_VERIFIED_MOMENT},
    "m_max": {"type": "integer", "minimum": 0, "maximum": clark.MAX_TRIG_DEGREE},
    "n_max": {"type": "integer", "minimum": 2, "maximum": 12},
    "method": {"type": "string", "enum": list(correlations.METHODS)},
    "decay": {
        "type": "object",
        "properties": {
            "k": {"type": "integer", "minimum": 2, "maximum": 6},
            "signs": {"type": "array", "items": {"enum": [1, -1]}},
            "q_values": {"type": "array", "items": {"type": "integer", "minimum": 1}, "minItems": 1},
            "base_index": {"type": "integer", "minimum": 1},
            "q_min": {"type": "integer", "minimum": 1}
        },
        "additionalProperties": False
    },
    "products": {"type": "array", "items": {"type": "string", "enum": catalog.product_names()}},
    "ratio": {"type": "number", "exclusiveMinimum": 1},
}


def _schema(*names):
    return {
        "type": "object",
        "properties": {name: PROPERTIES[name] for name in ("schema_version",) + names},
        "required": ["schema_version"],
        "additionalProperties": False
    }


commands = [
    {
        "name": "verify",
        "description": "Runs the exact-identity suite (Clark measures and iterate correlations) "
                       "over the catalog products.",
        "input_schema": _schema("products", "n_max", "n_alpha", "l_max", "m_max", "method"),
        "defaults": {"products": None, "n_max": 6, "n_alpha": 64, "l_max": 8, "m_max": 8,
                     "method": "auto"},
    },
    {
        "name": "clt",
        "description": "Samples normalized partial sums and tests them against the standard "
                       "complex normal.",
        "input_schema": _schema("product", "sequence", "N", "mode", "cutoff", "sampling",
                                "t_grid", "thresholds"),
        "defaults": {"product": "half", "sequence": "constant", "N": 400, "mode": "partial"},
    },
    {
        "name": "tails",
        "description": "Runs the harness on normalized tails of a square-summable series.",
        "input_schema": _schema("product", "sequence", "N", "cutoff", "sampling", "t_grid",
                                "thresholds"),
        "defaults": {"product": "half", "sequence": "harmonic", "N": 400, "mode": "tail",
                     "sampling": {"kind": "mc", "M": 10_000, "seed": 0},
                     "thresholds": {"cf_gap": TAIL_CF_GAP_THRESHOLD}},
    },
    {
        "name": "blocks",
        "description": "Builds and verifies the long/short block decomposition of 1..N.",
        "input_schema": _schema("product", "sequence", "N", "phi"),
        "defaults": {"product": "half", "sequence": "constant", "N": 10_000, "phi": None},
    },
    {
        "name": "clark",
        "description": "Computes Clark measures on an alpha grid and checks their identities.",
        "input_schema": _schema("product", "n_alpha", "l_max", "m_max"),
        "defaults": {"product": "half", "n_alpha": 64, "l_max": 8, "m_max": 8},
    },
    {
        "name": "correlations",
        "description": "Checks correlation identities, decay of higher correlations and norm "
                       "comparability.",
        "input_schema": _schema("product", "sequence", "N", "n_max", "method", "decay"),
        "defaults": {"product": "half", "sequence": "constant", "N": 8, "n_max": 6,
                     "method": "auto",
                     "decay": {"k": 4, "signs": [-1, 1, -1, 1], "q_values": list(range(3, 11)),
                               "base_index": 1}},
    },
    {
        "name": "optimality",
        "description": "Shows the Gaussian limit failing for a geometric sequence that violates "
                       "the growth condition.",
        "input_schema": _schema("product", "N", "sampling", "ratio"),
        "defaults": {"product": "half", "N": [20, 30], "ratio": 2.0,
                     "sampling": {"kind": "mc", "M": 100_000, "seed": 0}},
    },
]


def get_command(name):
    for command in commands:
        if command["name"] == name:
            return command
    raise ValueError(f"Invalid command: {name}")


@dataclass
class ParsedConfig:
    command: str
    data: dict
    digest: str
    settings: dict
    product: object = None
    sequence: object = None
    experiment: object = None
    overrides: dict = field(default_factory=dict)

    @property
    def seed(self):
        return self.settings.get("sampling", {}).get("seed", 0)


def _node_line(root, path):
    """1-based line of the YAML node at the given key path (or of its closest ancestor)."""
    if root is None:
        return None
    node = root
    line = node.start_mark.line + 1
    for key in path:
        child = None
        if isinstance(node, yaml.MappingNode):
            for k, v in node.value:
                if k.value == str(key):
                    child = v
                    break
        elif isinstance(node, yaml.SequenceNode) and isinstance(key, int) and key < len(node.value):
            child = node.value[key]
        if child is None:
            break
        node = child
        line = node.start_mark.line + 1
    return line


def _dotted(path):
    return ".".join(str(p) for p in path)


def _schema_error(error, root):
    path = list(error.absolute_path)
    if error.validator == "additionalProperties":
        allowed = set(error.schema.get("properties", {}))
        extra = sorted(set(error.instance) - allowed)
        if extra:
            path.append(extra[0])
            return ConfigError(f"unknown key '{extra[0]}'", _dotted(path), _node_line(root, path))
    return ConfigError(error.message, _dotted(path) or None, _node_line(root, path))


def load_yaml(text):
    try:
        root = yaml.compose(text)
        data = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        mark = getattr(exc, "problem_mark", None)
        raise ConfigError(f"config is not valid YAML: {exc}",
                          line=mark.line + 1 if mark is not None else None) from exc
    if data is None:
        data = {}
    if not isinstance(data, dict):
        raise ConfigError("config must be a mapping", line=1)
    return data, root


def _complex(value):
    if isinstance(value, (list, tuple)):
        return complex(value[0], value[1])
    return complex(value)


def _build(parse, path, root, what):
    try:
        return parse()
    except (InnerCLTError, ValueError, KeyError) as exc:
        raise ConfigError(f"{what}: {exc}", path, _node_line(root, path.split("."))) from exc


def _merged(defaults, data):
    settings = {k: v for k, v in defaults.items()}
    settings.update({k: v for k, v in data.items() if k != "schema_version"})
    return settings


def _product(value):
    if isinstance(value, str):
        return catalog.get_product("name", value)
    return inner_core.from_spec(value)


def _sequence(value):
    if isinstance(value, str):
        return catalog.get_sequence(value)
    return sequences.from_spec(value)


def _sampling(settings, overrides):
    sampling = dict(settings.get("sampling") or {})
    if overrides.get("grid") is not None:
        sampling.update(kind="grid", M=overrides["grid"])
    if overrides.get("mc_samples") is not None:
        sampling.update(kind="mc", M=overrides["mc_samples"])
    if overrides.get("seed") is not None:
        sampling["seed"] = overrides["seed"]
    return sampling


def parse_config_text(text, command, overrides=None):
    """Validates config text for a command and builds the objects it describes.

    Unknown keys are rejected, and domain preconditions (zeros inside the disk,
    summable sequences for tail mode, non-rotations for the harness) are checked
    here, with the offending key path and line in the error.
    """
    overrides = {k: v for k, v in (overrides or {}).items() if v is not None}
    spec = get_command(command)
    data, root = load_yaml(text)
    validator = jsonschema.Draft7Validator(spec["input_schema"])
    errors = sorted(validator.iter_errors(data), key=lambda e: [str(p) for p in e.absolute_path])
    if errors:
        raise _schema_error(errors[0], root)
    digest = config_digest(data)
    settings = _merged(spec["defaults"], data)
    settings["sampling"] = _sampling(settings, overrides)
    parsed = ParsedConfig(command=command, data=data, digest=digest, settings=settings,
                          overrides=overrides)

    if "product" in settings:
        where = "product.zeros" if isinstance(settings["product"], dict) else "product"
        parsed.product = _build(lambda: _product(settings["product"]), where, root,
                                "invalid product")
    if "sequence" in settings:
        parsed.sequence = _build(lambda: _sequence(settings["sequence"]), "sequence", root,
                                 "invalid sequence")
    if command in ("clt", "tails", "optimality", "correlations"):
        _build(lambda: inner_core.require_not_rotation(parsed.product, command), "product", root,
               "invalid product")
    if command in ("clt", "tails"):
        parsed.experiment = _build(lambda: _experiment(settings, parsed, overrides), "mode", root,
                                   "invalid experiment")
    return parsed


def _experiment(settings, parsed, overrides):
    N = settings["N"]
    t_grid = tuple(_complex(t) for t in settings.get("t_grid", DEFAULT_T_GRID))
    return clt_harness.ExperimentConfig(
        product=parsed.product, sequence=parsed.sequence,
        N=tuple(N) if isinstance(N, list) else (N,),
        mode=settings.get("mode", "partial"), cutoff=settings.get("cutoff"),
        sampling=clt_harness.Sampling(**settings["sampling"]),
        t_grid=t_grid, thresholds=clt_harness.Thresholds(**settings.get("thresholds", {})),
        threads=overrides.get("threads", 1))


def parse_config(path, command, overrides=None):
    if path is None:
        return parse_config_text(f"schema_version: {SCHEMA_VERSION}\n", command, overrides)
    try:
        with open(path, encoding="utf-8") as handle:
            text = handle.read()
    except OSError as exc:
        raise ConfigError(f"cannot read config: {exc}", path=str(path)) from exc
    return parse_config_text(text, command, overrides)


LAG_SUMMARY_MAX_N = 10 ** 7

CHECK_FIELDS = ["name", "lhs_re", "lhs_im", "rhs_re", "rhs_im", "residual", "pass"]


def check_row(name, lhs, rhs, residual, passed):
    lhs, rhs = complex(lhs), complex(rhs)
    return {"name": name, "lhs_re": lhs.real, "lhs_im": lhs.imag, "rhs_re": rhs.real,
            "rhs_im": rhs.imag, "residual": float(residual), "pass": bool(passed)}


def _correlation_rows(reports, prefix=""):
    return [check_row(prefix + r.description, r.lhs, r.rhs, r.residual, r.passed) for r in reports]


def _clark_rows(residuals, prefix=""):
    return [check_row(prefix + r.label, r.lhs, r.rhs, r.residual, r.passed) for r in residuals]


def _record_all(manager, rows):
    for row in rows:
        manager.record(row["pass"])


def run_verify(parsed, manager):
    s = parsed.settings
    if s.get("products"):
        products = [(name, catalog.get_product("name", name)) for name in s["products"]]
    else:
        products = catalog.default_products()
    rows = []
    for name, f in products:
        rows += _clark_rows(clark.clark_suite(f, s["n_alpha"], s["l_max"], s["m_max"]),
                            f"{name}: ")
        rows += _correlation_rows(
            correlations.identity_suite(f, s["n_max"], method=s["method"],
                                        threads=parsed.overrides.get("threads", 1)),
            f"{name}: ")
    _record_all(manager, rows)
    manager.add_table("verify", rows, CHECK_FIELDS)
    return rows


def _harness(parsed, manager):
    config = parsed.experiment
    sweep_rows, last, report = [], None, None
    for N in config.N:
        last = clt_harness.simulate(config, N)
        report = clt_harness.gaussian_tests(last, config.t_grid, config.thresholds)
        sweep_rows.append(clt_harness.sweep_row(N, report))
    manager.record(report.verdict == "PASS")
    manager.add_csv("samples.csv", [{"re": v.real, "im": v.imag} for v in last.values],
                    ["re", "im"])
    payload = report.to_dict()
    payload["metadata"] = {
        "product": inner_core.to_spec(config.product),
        "N": last.N, "sigma": last.sigma, "S": last.S, "mode": last.mode,
        "sampling": {"kind": last.sampling.kind, "M": last.sampling.M,
                     "seed": last.sampling.seed, "offset": last.sampling.offset},
        "cutoff": last.cutoff, "truncation_bound": last.truncation_bound,
        "thresholds_note": "desk-scale calibration thresholds, not rates from theory",
    }
    manager.add_json("report.json", payload)
    cf_rows = [{"t_re": r.t.real, "t_im": r.t.imag, "phi_re": r.value.real,
                "phi_im": r.value.imag, "target": r.target, "gap": r.gap}
               for r in report.cf_table]
    manager.add_csv("cf_curve.csv", cf_rows, ["t_re", "t_im", "phi_re", "phi_im", "target", "gap"])
    if len(config.N) > 1:
        manager.add_table("sweep", sweep_rows)
    return report


def run_blocks(parsed, manager):
    s = parsed.settings
    seq, N = parsed.sequence, s["N"] if isinstance(s["N"], int) else s["N"][-1]
    phi = s["phi"] if s.get("phi") is not None else sequences.phi_envelope(seq, N)
    lam = parsed.product.multiplier
    partition = blocks.build_blocks(seq, N, phi)
    # the lag sums materialize a_1..a_N
    lagged = N <= LAG_SUMMARY_MAX_N
    report = blocks.verify_partition(seq, partition, phi, lam=lam if lagged else None)
    ratio = blocks.block_variance_ratio(seq, lam, partition) if lagged else None
    rows = []
    for k, kind, start, end in partition.blocks:
        rows.append({"k": k, "kind": kind, "start": start, "end": end, "count": end - start + 1,
                     "energy": float(sequences.cumulative_energy(seq, end, N)
                                     - sequences.cumulative_energy(seq, start - 1, N))})
    manager.add_table("blocks", rows, ["k", "kind", "start", "end", "count", "energy"])
    profile = sequences.variance_profile(seq, lam, N) if lagged else None
    summary = [{"N": N, "phi": phi, "P_N": partition.P_N, "Q_N": partition.Q_N,
                "q_phi": report.q_phi, "residual_energy": partition.residual_energy,
                "S_N2": profile.S_N2 if profile else None,
                "sigma_N2": profile.sigma_N2 if profile else None,
                "growth_ratio": profile.growth_ratio if profile else None,
                "variance_ratio": ratio,
                "a_energy_fraction": blocks.a_energy_fraction(seq, partition),
                "large_block_ratio": report.large_block_ratio,
                "remainder_ratio": report.remainder_ratio}]
    manager.add_table("blocks_summary", summary)
    checks = [{"name": c.name, "pass": c.passed, "detail": c.detail} for c in report.checks]
    _record_all(manager, checks)
    manager.add_table("blocks_invariants", checks, ["name", "pass", "detail"])
    return report


def run_clark(parsed, manager):
    s = parsed.settings
    f = parsed.product
    atoms = []
    for alpha in uniform_grid(s["n_alpha"], offset=0.5).points:
        alpha = complex(alpha)
        mu = clark.clark_measure(f, alpha)
        for z, w in mu.atoms:
            atoms.append({"alpha_re": alpha.real, "alpha_im": alpha.imag, "atom_re": z.real,
                          "atom_im": z.imag, "weight": w})
    manager.add_table("clark", atoms, ["alpha_re", "alpha_im", "atom_re", "atom_im", "weight"])
    rows = _clark_rows(clark.clark_suite(f, s["n_alpha"], s["l_max"], s["m_max"]))
    _record_all(manager, rows)
    manager.add_table("clark_checks", rows, CHECK_FIELDS)
    return rows


def _split_ranges(N, parts=3):
    edges = np.linspace(0, N, min(parts, N) + 1).round().astype(int)
    return [(int(a) + 1, int(b)) for a, b in zip(edges, edges[1:]) if b > a]


def run_correlations(parsed, manager):
    s = parsed.settings
    f, seq = parsed.product, parsed.sequence
    N = s["N"] if isinstance(s["N"], int) else s["N"][-1]
    threads = parsed.overrides.get("threads", 1)
    reports = correlations.identity_suite(f, s["n_max"], method=s["method"], threads=threads)
    reports.append(correlations.uncorrelated_squares_check(f, seq, _split_ranges(N),
                                                           method=s["method"], threads=threads))
    reports += correlations.norm_comparability_check(f, seq, N, threads=threads)
    rows = _correlation_rows(reports)
    decay = dict(s["decay"])
    fit = correlations.decay_fit(f, decay.get("k", 4), decay.get("signs", [-1, 1, -1, 1]),
                                 decay.get("q_values", list(range(3, 11))),
                                 base_index=decay.get("base_index", 1), method=s["method"],
                                 q_min=decay.get("q_min", 1), threads=threads)
    limit = fit.bound_slope + correlations.DECAY_SLOPE_MARGIN
    slope = fit.slope if fit.slope is not None else -math.inf
    rows.append(check_row(f"decay k={fit.k} {fit.note}".strip(),
                          slope if math.isfinite(slope) else 0.0,
                          limit if math.isfinite(limit) else 0.0,
                          max(slope - limit, 0.0) if math.isfinite(slope - limit) else 0.0,
                          fit.passed))
    _record_all(manager, rows)
    manager.add_table("correlations", rows, CHECK_FIELDS)
    return rows


def run_optimality(parsed, manager):
    s = parsed.settings
    sampling = s["sampling"]
    N_list = s["N"] if isinstance(s["N"], list) else [s["N"]]
    rows = clt_harness.optimality_demo(parsed.product, N_list, sampling.get("M", 100_000),
                                       sampling.get("seed", 0), ratio=s["ratio"],
                                       sampling_kind=sampling.get("kind", "mc"),
                                       threads=parsed.overrides.get("threads", 1))
    manager.add_table("optimality", rows)
    return rows


@weave.op()
def process_command(command_name, parsed, manager):
    logger.info("running %s (config %s)", command_name, parsed.digest[:12])
    if command_name == "verify":
        return run_verify(parsed, manager)
    elif command_name == "clt":
        return _harness(parsed, manager)
    elif command_name == "tails":
        return _harness(parsed, manager)
    elif command_name == "blocks":
        return run_blocks(parsed, manager)
    elif command_name == "clark":
        return run_clark(parsed, manager)
    elif command_name == "correlations":
        return run_correlations(parsed, manager)
    elif command_name == "optimality":
        return run_optimality(parsed, manager)
    raise ValueError(f"Invalid command: {command_name}")
