"""Batch experiment runner.

Usage::

    bargmann run config.json [--seed S] [--out DIR] [--tolerance T]
    bargmann validate config.json [...]
    bargmann sweep config.json --axis NAME --values V1,V2,... [...]

Exit status: 0 success, 2 config/usage error, 3 capacity error,
4 validation failure.
"""
from __future__ import annotations

import argparse
import copy
import csv
import hashlib
import json
import math
import sys
import time
from pathlib import Path

import numpy as np

from bargmann import __version__, applications as apps, kernels
from bargmann.errors import CapacityError, SeriesError, TruncationError
from bargmann.fock import (MixedState, as_mixed, dual_rail_qubit, fock_state, random_pure_state,
                           single_photon_state, state_from_dict, tensor_product,
                           truncated_coherent_state, vacuum)
from bargmann.oracle import certify_cyclic_symmetry, direct_multivariate_trace
from bargmann.protocol import EXACT, Sampled, estimate_multivariate_trace, is_exact

EXIT_OK, EXIT_USAGE, EXIT_CAPACITY, EXIT_VALIDATION = 0, 2, 3, 4
EXACT_TOLERANCE = 1e-8
EXPERIMENTS = ("trace", "hom", "suppression", "renyi", "spectrum", "kernel", "quasiprob")


class ConfigError(ValueError):
    pass


# -- config parsing ---------------------------------------------------------

def _complex(value):
    if isinstance(value, (list, tuple)):
        if len(value) != 2:
            raise ConfigError(f"complex numbers are [re, im] pairs, got {value!r}")
        return complex(float(value[0]), float(value[1]))
    if isinstance(value, dict):
        return complex(float(value.get("re", 0.0)), float(value.get("im", 0.0)))
    return complex(float(value))


def _complex_vector(value):
    if isinstance(value, (int, float)):
        return np.array([complex(value)])
    if isinstance(value, list) and len(value) == 2 and all(isinstance(v, (int, float)) for v in value):
        # ambiguous [re, im] vs two real entries: a bare pair means one complex number
        return np.array([_complex(value)])
    return np.array([_complex(v) for v in value])


def build_state(spec):
    """Turn a state entry (constructor name + parameters, or serialized state) into a state."""
    if not isinstance(spec, dict):
        raise ConfigError(f"state entry must be an object, got {spec!r}")
    kind = spec.get("kind")
    try:
        if kind is None or kind == "pure" or kind == "serialized":
            if "layout" in spec or "components" in spec:
                return state_from_dict(spec)
            raise ConfigError(f"state entry without kind: {spec!r}")
        if kind == "single_photon":
            if "angle" in spec:
                t = float(spec["angle"])
                return single_photon_state([math.cos(t), math.sin(t)])
            return single_photon_state([_complex(c) for c in spec["amplitudes"]])
        if kind == "dual_rail":
            return dual_rail_qubit(float(spec["theta"]), float(spec.get("phi", 0.0)))
        if kind == "coherent":
            beta = _complex_vector(spec["beta"])
            return truncated_coherent_state(beta, int(spec["cutoff"]), spec.get("max_tail")).state
        if kind == "fock":
            return fock_state(spec["occupations"])
        if kind == "vacuum":
            return vacuum(int(spec.get("d", 1)))
        if kind == "random_pure":
            return random_pure_state(int(spec["d"]), spec.get("photons", 1), int(spec.get("seed", 0)))
        if kind in ("mixture", "mixed"):
            comps = spec["components"]
            return MixedState(tuple((float(c["weight"]), _single_pure(build_state(c["state"])))
                                    for c in comps))
    except (KeyError, TypeError) as exc:
        raise ConfigError(f"bad {kind!r} state entry: {exc}") from exc
    raise ConfigError(f"unknown state kind {kind!r}")


def _single_pure(state):
    mixed = as_mixed(state)
    if not mixed.is_pure:
        raise ConfigError("mixture components must be pure states")
    return mixed.components[0][1]


def parse_mode(spec, seed):
    if spec is None or spec == EXACT or (isinstance(spec, dict) and spec.get("kind") == EXACT):
        return EXACT
    if not isinstance(spec, dict) or spec.get("kind") != "sampled":
        raise ConfigError(f"mode must be 'exact' or {{'kind': 'sampled', ...}}, got {spec!r}")
    delta = float(spec.get("delta", spec.get("delta_fail", 0.05)))
    has_n, has_eps = "N" in spec, "epsilon" in spec
    if has_n == has_eps:
        raise ConfigError("sampled mode needs exactly one of N or epsilon")
    if has_n:
        return Sampled(int(spec["N"]), int(seed), delta)
    return Sampled.with_precision(float(spec["epsilon"]), delta, int(seed))


def load_config(path):
    try:
        with open(path) as fh:
            config = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    if not isinstance(config, dict):
        raise ConfigError("config must be a JSON object")
    return config


def _states(config, minimum=1):
    specs = config.get("states")
    if not isinstance(specs, list) or len(specs) < minimum:
        raise ConfigError(f"config needs a 'states' list with at least {minimum} entries")
    return [build_state(s) for s in specs]


# -- experiments ------------------------------------------------------------
# Each handler returns (result dict, protocol value(s), oracle value(s), error scale).
# The error scale multiplies the Hoeffding bound when validating sampled runs.

def _trace(config, mode):
    states = _states(config, 2)
    est = estimate_multivariate_trace(states, mode)
    return est.to_dict(), est.delta, direct_multivariate_trace(states), 1.0


def _hom(config, mode):
    states = _states(config, 2)
    if len(states) != 2:
        raise ConfigError("hom experiment takes exactly two states")
    est = estimate_multivariate_trace(states, mode)
    overlap = 2.0 * float(est.P[0]) - 1.0
    if not is_exact(mode):
        overlap = min(max(overlap, -2.0 * mode.epsilon), 1.0 + 2.0 * mode.epsilon)
    result = {"overlap": overlap, "P0": float(est.P[0]), "estimate": est.to_dict()}
    return result, overlap, direct_multivariate_trace(states).real, 1.0


def _suppression(config, mode):
    states = _states(config, 2)
    est = estimate_multivariate_trace(states, mode)
    cert = certify_cyclic_symmetry(tensor_product(states))
    p0 = float(est.P[0])
    threshold = 1e-10 if is_exact(mode) else mode.epsilon
    result = {
        "P": [float(p) for p in est.P],
        "P0": p0,
        "is_symmetric": bool(p0 >= 1.0 - threshold),
        "oracle_certificate": cert.to_dict(),
        "estimate": est.to_dict(),
    }
    return result, p0, cert.P0, 0.5


def _renyi(config, mode):
    (rho,) = _states(config, 1)[:1]
    alpha = int(config.get("params", {}).get("alpha", 2))
    t = apps.power_trace(rho, alpha, mode)
    entropy = apps.renyi_entropy(rho, alpha, mode)
    t_ref = direct_multivariate_trace([rho] * alpha).real
    ref = math.log(t_ref) / (1 - alpha)
    result = {"alpha": alpha, "power_trace": t, "entropy": entropy}
    return result, entropy, ref, 1.0 / ((alpha - 1) * max(t_ref, 1e-300))


def _spectrum(config, mode):
    (rho,) = _states(config, 1)[:1]
    rank = int(config.get("params", {}).get("rank_bound", 2))
    report = apps.spectrum_from_traces(rho, rank, mode)
    ref_traces = [1.0] + [direct_multivariate_trace([rho] * k).real for k in range(2, rank + 1)]
    ref_roots = np.roots(apps.faddeev_leverrier(ref_traces))
    ref = float(np.max(ref_roots.real))
    return report.to_dict(), report.largest_eigenvalue, ref, float(rank)


def _kernel(config, mode, out_dir=None):
    states = _states(config, 2)
    ids = config.get("params", {}).get("ids") or [str(i) for i in range(len(states))]
    if len(ids) != len(states):
        raise ConfigError("params.ids must name every state")
    matrix = apps.kernel_matrix(states, mode)
    n = len(states)
    ref = np.array([[direct_multivariate_trace([states[i], states[j]]).real for j in range(n)]
                    for i in range(n)])
    result = {"ids": list(ids), "matrix": matrix.tolist()}
    if not is_exact(mode):
        result["pair_seeds"] = [{"i": i, "j": j, "seed": apps.pair_mode(mode, i, j).seed}
                                for i in range(n) for j in range(i + 1, n)]
    result["_csv"] = apps.kernel_csv(matrix, ids)
    return result, matrix, ref, 1.0


def _points(params):
    pts = params.get("points")
    if not isinstance(pts, list) or not pts:
        raise ConfigError("quasiprob experiment needs a non-empty params.points list")
    return pts


def _quasiprob(config, mode):
    params = config.get("params", {})
    func = params.get("function", "husimi")
    states = _states(config, 1)
    rho = as_mixed(states[0])
    cutoff = params.get("cutoff")
    sampled = not is_exact(mode)
    points, values, refs = [], [], []
    if func == "kirkwood_dirac":
        if len(states) != 3:
            raise ConfigError("kirkwood_dirac takes states [rho, a, b]")
        a, b = (_single_pure(s) for s in states[1:])
        value = apps.kirkwood_dirac(rho, a, b, mode)
        ref = direct_multivariate_trace([a, rho, b])
        result = {"function": func, "value": [value.real, value.imag]}
        return result, value, ref, 1.0
    for idx, pt in enumerate(_points(params)):
        pmode = mode.child(idx) if sampled else mode
        if func == "positive_p":
            alpha, beta = _complex_vector(pt["alpha"]), _complex_vector(pt["beta"])
            value = apps.positive_p(rho, alpha, beta, cutoff, pmode)
            c = apps._coherent_cutoff(rho, (alpha, beta), cutoff, apps.DEFAULT_MAX_TAIL)
            ka = truncated_coherent_state(alpha, c).state
            kb = truncated_coherent_state(beta, c).state
            ref = direct_multivariate_trace([ka, rho, kb]) / math.pi ** 2
            entry = {"alpha_re": alpha[0].real, "alpha_im": alpha[0].imag,
                     "beta_re": beta[0].real, "beta_im": beta[0].imag,
                     "value": value.real, "value_im": value.imag}
        else:
            alpha = _complex_vector(pt)
            if func == "husimi":
                value = apps.husimi_q(rho, alpha, cutoff, pmode)
                c = rho.max_photons if cutoff is None else cutoff
                probe, tail = truncated_coherent_state(alpha, c)
                ref = (1.0 - tail) * direct_multivariate_trace([rho, probe]).real / math.pi
            elif func == "wigner":
                n_max = params.get("n_max")
                value = apps.wigner_point(rho, alpha, n_max, cutoff, pmode)
                ref = apps.wigner_reference(rho, alpha, n_max, cutoff)
            else:
                raise ConfigError(f"unknown quasiprobability function {func!r}")
            entry = {"alpha_re": alpha[0].real, "alpha_im": alpha[0].imag, "value": value}
        points.append(entry)
        values.append(value)
        refs.append(ref)
    scale = {"husimi": 1 / math.pi, "positive_p": 1 / math.pi ** 2, "wigner": 2 / math.pi}[func]
    result = {"function": func, "points": points}
    return result, np.array(values), np.array(refs), scale


HANDLERS = {"trace": _trace, "hom": _hom, "suppression": _suppression, "renyi": _renyi,
            "spectrum": _spectrum, "kernel": _kernel, "quasiprob": _quasiprob}


# -- running ----------------------------------------------------------------

def _jsonable(value):
    if isinstance(value, dict):
        return {k: _jsonable(v) for k, v in value.items()}
    if isinstance(value, np.ndarray):
        value = value.tolist()
    if isinstance(value, (list, tuple)):
        return [_jsonable(v) for v in value]
    if isinstance(value, (np.generic,)):
        value = value.item()
    if isinstance(value, complex):
        return [value.real, value.imag]
    return value


def _dump(obj, path):
    Path(path).write_text(json.dumps(obj, indent=2, sort_keys=True) + "\n")


def config_hash(config):
    return hashlib.sha256(json.dumps(config, sort_keys=True).encode()).hexdigest()


def execute(config):
    """Run one experiment; returns (result, protocol value, oracle value, mode, scale)."""
    kind = config.get("experiment")
    if kind not in HANDLERS:
        raise ConfigError(f"experiment must be one of {', '.join(EXPERIMENTS)}, got {kind!r}")
    mode = parse_mode(config.get("mode", EXACT), config.get("seed", 0))
    result, value, ref, scale = HANDLERS[kind](config, mode)
    return result, value, ref, mode, scale


def default_tolerance(mode, scale):
    """Exact runs: 1e-8. Sampled: Hoeffding bound on a complex mean, ``2 sqrt(2) eps``, scaled."""
    if is_exact(mode):
        return EXACT_TOLERANCE
    return 2.0 * math.sqrt(2.0) * mode.epsilon * scale


def run_config(config, out_dir, validate=False, tolerance=None):
    """Execute ``config``, write result/manifest(/validation) files, return exit status."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    start = time.perf_counter()
    result, value, ref, mode, scale = execute(config)
    csv_text = result.pop("_csv", None)
    if csv_text is not None:
        (out_dir / "kernel.csv").write_text(csv_text)
    _dump(_jsonable(result), out_dir / "result.json")
    status = EXIT_OK
    if validate:
        err = float(np.max(np.abs(np.asarray(value) - np.asarray(ref))))
        tol = default_tolerance(mode, scale) if tolerance is None else float(tolerance)
        passed = err <= tol
        _dump(_jsonable({"protocol_value": value, "oracle_value": ref, "abs_error": err,
                         "tolerance": tol, "passed": passed}), out_dir / "validation.json")
        if not passed:
            print(f"validation failed: |protocol - oracle| = {err:.3e} > {tol:.3e}",
                  file=sys.stderr)
            status = EXIT_VALIDATION
    manifest = {
        "config_hash": config_hash(config),
        "seed": config.get("seed", 0),
        "tool_version": __version__,
        "kernel_backend": kernels.BACKEND,
        "experiment": config.get("experiment"),
        "mode": EXACT if is_exact(mode) else "sampled",
        "N": None if is_exact(mode) else mode.shots,
        "epsilon": None if is_exact(mode) else mode.epsilon,
        "wall_time": time.perf_counter() - start,
    }
    _dump(manifest, out_dir / "manifest.json")
    return status


def _scalar(value):
    arr = np.asarray(value)
    if arr.ndim == 0:
        return complex(arr)
    flat = arr.ravel()
    return complex(flat[1] if arr.ndim == 2 and flat.size > 1 else flat[0])


def _parse_values(text):
    values = []
    for tok in text.split(","):
        tok = tok.strip()
        if not tok:
            continue
        num = float(tok)
        values.append(int(num) if num.is_integer() and "." not in tok and "e" not in tok.lower()
                      else num)
    return values


def set_axis(config, axis, value):
    """Copy of ``config`` with the sweep axis set to ``value``.

    ``N`` and ``epsilon`` address the sampled mode, ``seed`` the seed, and any
    other name is a dotted path into the config (list indices allowed).
    """
    cfg = copy.deepcopy(config)
    if axis in ("N", "epsilon"):
        mode = cfg.get("mode")
        mode = dict(mode) if isinstance(mode, dict) else {}
        mode["kind"] = "sampled"
        mode.pop("N", None)
        mode.pop("epsilon", None)
        mode[axis] = value
        cfg["mode"] = mode
        return cfg
    if axis == "seed":
        cfg["seed"] = value
        return cfg
    keys = axis.split(".")
    node = cfg
    try:
        for k in keys[:-1]:
            node = node[int(k)] if isinstance(node, list) else node.setdefault(k, {})
        last = keys[-1]
        if isinstance(node, list):
            node[int(last)] = value
        else:
            node[last] = value
    except (IndexError, ValueError, TypeError, AttributeError) as exc:
        raise ConfigError(f"cannot set sweep axis {axis!r}: {exc}") from exc
    return cfg


def run_sweep(config, axis, values, out_dir):
    """Evaluate every axis point in order; rows are flushed as they complete."""
    if not values:
        raise ConfigError("sweep needs at least one axis value")
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    start = time.perf_counter()
    path = out_dir / "sweep.csv"
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow([axis, "estimate_re", "estimate_im", "oracle_re", "oracle_im", "abs_error"])
        fh.flush()
        for v in values:
            _, value, ref, _, _ = execute(set_axis(config, axis, v))
            est, orc = _scalar(value), _scalar(ref)
            writer.writerow([repr(v), repr(est.real), repr(est.imag), repr(orc.real),
                             repr(orc.imag), repr(abs(est - orc))])
            fh.flush()
    manifest = {"config_hash": config_hash(config), "seed": config.get("seed", 0),
                "tool_version": __version__, "axis": axis, "values": values,
                "wall_time": time.perf_counter() - start}
    _dump(manifest, out_dir / "manifest.json")
    return EXIT_OK


def build_parser():
    parser = argparse.ArgumentParser(prog="bargmann", description=__doc__.split("\n")[0])
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("config", help="experiment config (JSON)")
        p.add_argument("--seed", type=int, help="override the config seed")
        p.add_argument("--out", help="output directory (default: config 'output' or ./results)")
        p.add_argument("--tolerance", type=float, help="validation tolerance override")

    run = sub.add_parser("run", help="run one experiment")
    common(run)
    run.add_argument("--validate", action="store_true", help="compare against the oracle")
    common(sub.add_parser("validate", help="run and compare against the oracle"))
    sweep = sub.add_parser("sweep", help="run one experiment per axis value")
    common(sweep)
    sweep.add_argument("--axis", required=True)
    sweep.add_argument("--values", required=True, help="comma-separated values")
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        config = load_config(args.config)
        if args.seed is not None:
            config["seed"] = args.seed
        out = args.out or config.get("output") or "results"
        if args.command == "sweep":
            return run_sweep(config, args.axis, _parse_values(args.values), out)
        validate = args.command == "validate" or args.validate or bool(config.get("validate"))
        return run_config(config, out, validate, args.tolerance)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ValueError as exc:
        if isinstance(exc, TruncationError):
            print(f"truncation error: {exc}", file=sys.stderr)
            return EXIT_CAPACITY
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (CapacityError, SeriesError) as exc:
        print(f"capacity error: {exc}", file=sys.stderr)
        return EXIT_CAPACITY


if __name__ == "__main__":
    sys.exit(main())
