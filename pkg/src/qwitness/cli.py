"""qwitness command line interface.

Subcommands: verify, bounds, optimize, witness, contextuality.  Scenarios
come from an optional JSON config file; command-line flags override file
fields.  Reports are canonical JSON (sorted keys, shortest round-trip float
formatting), written to stdout and optionally to --out; diagnostics go to
stderr only.

Exit codes: 0 all checks passed, 2 a check failed, 3 invalid config,
4 enumeration cap exceeded.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import os
import sys
import time

import numpy as np

from . import __version__
from .classical import CapExceededError, hybrid_bound, lhv_bound, noncontextual_bound
from .ineq import (
    CertificationError,
    chsh_element,
    chsh_optimal_settings,
    cycle_from_settings,
    decompose_svetlichny,
    noncontextual_cycle,
    svetlichny_operator,
    svetlichny_pattern,
)
from .opalg import (
    anticommutator,
    commutator,
    frob_distance,
    frob_norm,
    hermitian_eigenvalues,
    hermiticity_defect,
)
from .optimize import Lcg64, OptimizationConfig, maximize_expectation, maximize_violation
from .qobs import (
    BlochVector,
    SettingsTable,
    expectation,
    ghz_state,
    maximally_mixed,
    noisy_mixture,
    product_state,
)
from .witness import WitnessIdentityError, evaluate_witness, witness_pair

EXIT_OK = 0
EXIT_CHECK_FAILED = 2
EXIT_INVALID_CONFIG = 3
EXIT_CAP_EXCEEDED = 4

EXACT_IDENTITY_TOL = 1e-12
ELEMENT_IDENTITY_TOL = 1e-11  # scaled by dimension
CYCLE_PSD_TOL = 1e-9

CHSH_COMBINATION_NOTE = (
    "correlation combination A1B1 + A1B2 + A2B1 - A2B2, the form forced by "
    "the anticommutator identity {X,Y} = 4E"
)


class ConfigError(ValueError):
    """Invalid or incomplete run configuration."""


def _plain(x):
    """Convert report payloads to canonical JSON-ready python types."""
    if isinstance(x, dict):
        return {str(k): _plain(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_plain(v) for v in x]
    if isinstance(x, (bool, np.bool_)):
        return bool(x)
    if isinstance(x, (int, np.integer)):
        return int(x)
    if isinstance(x, (float, np.floating)):
        return float(x)
    if x is None or isinstance(x, str):
        return x
    if isinstance(x, np.ndarray):
        return [_plain(v) for v in x.tolist()]
    raise TypeError(f"cannot serialize {type(x)!r}")


def canonical_json(payload) -> str:
    """Canonical serialization: sorted keys, two-space indent, floats in
    shortest round-trip form (at most 17 significant digits)."""
    return json.dumps(_plain(payload), sort_keys=True, indent=2, ensure_ascii=False) + "\n"


def _inputs_digest(cfg: dict) -> str:
    reproducible = {k: v for k, v in cfg.items() if k != "output_path"}
    return hashlib.sha256(canonical_json(reproducible).encode("utf-8")).hexdigest()


def _complex_matrix(data) -> np.ndarray:
    """Parse a matrix given as nested [re, im] entry pairs."""
    try:
        rows = [[complex(entry[0], entry[1]) for entry in row] for row in data]
    except (TypeError, IndexError) as exc:
        raise ConfigError(f"matrix entries must be [re, im] pairs: {exc}")
    m = np.array(rows, dtype=np.complex128)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ConfigError(f"matrix must be square, got shape {m.shape}")
    return m


def _settings_from_cfg(cfg: dict, n_parties: int) -> SettingsTable | None:
    data = cfg.get("settings")
    if data is None:
        return None
    try:
        table = SettingsTable.from_json_dict(data)
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigError(f"bad settings table: {exc}")
    if table.n_parties != n_parties:
        raise ConfigError(
            f"settings table has {table.n_parties} parties, config says {n_parties}"
        )
    return table


def _optimizer_cfg(cfg: dict) -> OptimizationConfig:
    data = dict(cfg.get("optimizer") or {})
    data.setdefault("seed", cfg.get("seed", 1))
    try:
        return OptimizationConfig.from_json_dict(data)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"bad optimizer config: {exc}")


def _build_state(cfg: dict, n_parties: int) -> tuple[np.ndarray, str]:
    tag = cfg.get("state", "ghz")
    if tag == "ghz":
        return ghz_state(n_parties), "ghz"
    if tag == "mixed":
        return maximally_mixed(n_parties), "mixed"
    if tag == "product":
        blochs_data = cfg.get("product_blochs")
        if blochs_data is None:
            blochs = [BlochVector(0.0, 0.0, 1.0)] * n_parties
        else:
            try:
                blochs = [BlochVector(*v) for v in blochs_data]
            except (TypeError, ValueError) as exc:
                raise ConfigError(f"bad product_blochs: {exc}")
            if len(blochs) != n_parties:
                raise ConfigError(
                    f"product_blochs has {len(blochs)} entries, expected {n_parties}"
                )
        return product_state(blochs), "product"
    if tag.startswith("noisy-ghz:"):
        try:
            v = float(tag.split(":", 1)[1])
        except ValueError:
            raise ConfigError(f"bad visibility in state tag {tag!r}")
        if not 0.0 <= v <= 1.0:
            raise ConfigError("visibility must lie in [0, 1]")
        return noisy_mixture(ghz_state(n_parties), v), tag
    raise ConfigError(f"unknown state tag {tag!r}")


def _workers() -> int:
    raw = os.environ.get("QWITNESS_THREADS", "0")
    try:
        n = int(raw)
    except ValueError:
        raise ConfigError(f"QWITNESS_THREADS must be an integer, got {raw!r}")
    if n < 0:
        raise ConfigError("QWITNESS_THREADS must be nonnegative")
    return n if n > 0 else (os.cpu_count() or 1)


def cmd_verify(cfg: dict) -> tuple[dict, int]:
    """Run all operator-identity checks applicable to the party count."""
    n = cfg["n_parties"]
    if n < 2:
        raise ConfigError("verification needs at least two parties")
    dim = 2**n
    given = _settings_from_cfg(cfg, n)
    if given is not None:
        tables = [given]
    elif cfg.get("random_trials"):
        rng = Lcg64(cfg["seed"])
        tables = [rng.settings(n) for _ in range(int(cfg["random_trials"]))]
    else:
        raise ConfigError("verify needs a settings table or --random K")

    pattern = svetlichny_pattern(n)
    corrupt = cfg.get("corrupt_sign")
    if corrupt is not None:
        if not 0 <= int(corrupt) < 2**n:
            raise ConfigError(f"corrupt-sign index {corrupt} out of range")
        pattern = pattern.flipped(int(corrupt))

    residuals: dict[str, float] = {}
    thresholds: dict[str, float] = {}
    failed_identity = None

    def update(key: str, value: float, tol: float) -> None:
        residuals[key] = max(residuals.get(key, 0.0), value)
        thresholds[key] = tol

    try:
        for table in tables:
            if n == 2:
                element = chsh_element(table, pattern)
                pair = witness_pair(element)
                q = anticommutator(pair.x, pair.y)
                target = 4.0 * (2.0 * np.eye(4) - element.operator())
                update("chsh_4e", frob_distance(q, target), EXACT_IDENTITY_TOL)
                a, b, c, d = cycle_from_settings(table)
                x_op, y_op, ec = noncontextual_cycle(a, b, c, d)
                xy_target = 2.0 * ec.matrix + commutator(b, d) + commutator(c, a)
                update(
                    "noncontextual_xy",
                    frob_distance(x_op @ y_op, xy_target),
                    EXACT_IDENTITY_TOL,
                )
                update(
                    "noncontextual_4ec",
                    frob_distance(anticommutator(x_op, y_op), 4.0 * ec.matrix),
                    EXACT_IDENTITY_TOL,
                )
            else:
                elements = decompose_svetlichny(table, pattern)
                witnesses = []
                for e in elements:
                    pair = witness_pair(e)
                    q = anticommutator(pair.x, pair.y)
                    target = 4.0 * (2.0 * np.eye(dim) - e.operator())
                    update(
                        f"element_xi{e.index}",
                        frob_distance(q, target),
                        ELEMENT_IDENTITY_TOL * dim,
                    )
                    witnesses.append(q)
                total = witnesses[0]
                for q in witnesses[1:]:
                    total = total + q
                svet = svetlichny_operator(table, pattern)
                target = 4.0 * (2 ** (n - 1) * np.eye(dim) - svet.matrix)
                update("total", frob_distance(total, target), ELEMENT_IDENTITY_TOL * dim)
    except CertificationError as exc:
        failed_identity = {"name": "chsh_type_certification", "detail": str(exc)}
    except WitnessIdentityError as exc:
        failed_identity = {"name": "anticommutator_cancellation", "detail": str(exc)}

    passed = failed_identity is None and all(
        residuals[k] <= thresholds[k] for k in residuals
    )
    results = {
        "n_parties": n,
        "trials": len(tables),
        "residuals": residuals,
        "thresholds": thresholds,
        "passed": passed,
        "failed_identity": failed_identity,
        "notes": [CHSH_COMBINATION_NOTE],
    }
    return results, EXIT_OK if passed else EXIT_CHECK_FAILED


def cmd_bounds(cfg: dict) -> tuple[dict, int]:
    """Classical, hybrid, and 4-cycle bounds by exhaustive enumeration."""
    n = cfg["n_parties"]
    if n < 2:
        raise ConfigError("bounds need at least two parties")
    workers = _workers()
    pattern = svetlichny_pattern(n)
    results: dict = {"n_parties": n, "workers": workers}
    try:
        results["lhv"] = lhv_bound(pattern, n_partitions=workers).to_json_dict()
    except CapExceededError as exc:
        results["error"] = str(exc)
        return results, EXIT_CAP_EXCEEDED
    if n <= 4:
        results["hybrid"] = hybrid_bound(pattern, n_partitions=workers).to_json_dict()
    else:
        results["hybrid"] = None
        results["hybrid_notice"] = (
            f"hybrid enumeration skipped for N = {n}: the response-function "
            "space is large; call qwitness.classical.hybrid_bound directly if needed"
        )
    results["noncontextual"] = noncontextual_bound().to_json_dict()
    return results, EXIT_OK


def cmd_optimize(cfg: dict) -> tuple[dict, int]:
    """Maximize the inequality-operator violation over settings."""
    n = cfg["n_parties"]
    kind = "chsh" if n == 2 else "svetlichny"
    result = maximize_violation(n, kind, _optimizer_cfg(cfg))
    payload = {"kind": kind, "n_parties": n}
    payload.update(result.to_json_dict())
    return payload, EXIT_OK


def cmd_witness(cfg: dict) -> tuple[dict, int]:
    """Evaluate the total witness on a state; negativity is a result, not an error."""
    n = cfg["n_parties"]
    if n < 2:
        raise ConfigError("witness evaluation needs at least two parties")
    rho, state_desc = _build_state(cfg, n)
    table = _settings_from_cfg(cfg, n)
    optimizer_payload = None
    if table is None:
        if not cfg.get("optimize"):
            raise ConfigError("witness needs a settings table or --optimize")
        kind = "chsh" if n == 2 else "svetlichny"
        opt = maximize_expectation(n, kind, rho, _optimizer_cfg(cfg))
        table = opt.settings
        optimizer_payload = {
            "best_value": opt.best_value,
            "iterations": opt.iterations,
            "converged": opt.converged,
        }
    report = evaluate_witness(table, rho)
    results = {
        "state": state_desc,
        "report": report.to_json_dict(),
        "settings": table.to_json_dict(),
        "optimizer": optimizer_payload,
    }
    return results, EXIT_OK


def cmd_contextuality(cfg: dict) -> tuple[dict, int]:
    """Verify the 4-cycle construction; optionally evaluate it on a state."""
    custom = cfg.get("cycle")
    if custom is not None:
        try:
            a, b, c, d = (_complex_matrix(custom[key]) for key in ("a", "b", "c", "d"))
        except KeyError as exc:
            raise ConfigError(f"cycle config needs keys a, b, c, d: missing {exc}")
        for name, m in zip("abcd", (a, b, c, d)):
            if m.shape != (4, 4):
                raise ConfigError(f"cycle observable {name!r} must be 4x4")
    else:
        table = _settings_from_cfg(cfg, 2) or chsh_optimal_settings()
        a, b, c, d = cycle_from_settings(table)

    pair_norms = {
        "AB": frob_norm(commutator(a, b)),
        "BC": frob_norm(commutator(b, c)),
        "CD": frob_norm(commutator(c, d)),
        "DA": frob_norm(commutator(d, a)),
    }
    try:
        x_op, y_op, ec = noncontextual_cycle(a, b, c, d)
    except ValueError as exc:
        results = {
            "compatibility_norms": pair_norms,
            "error": str(exc),
            "passed": False,
        }
        return results, EXIT_CHECK_FAILED

    residuals = {
        "noncontextual_4ec": frob_distance(anticommutator(x_op, y_op), 4.0 * ec.matrix),
        "noncontextual_xy": frob_distance(
            x_op @ y_op, 2.0 * ec.matrix + commutator(b, d) + commutator(c, a)
        ),
    }
    min_eigs = {
        "X": float(hermitian_eigenvalues(x_op).values[0]),
        "Y": float(hermitian_eigenvalues(y_op).values[0]),
    }

    ec_value = None
    if cfg.get("state_matrix") is not None:
        rho = _complex_matrix(cfg["state_matrix"])
        if rho.shape != (4, 4):
            raise ConfigError("state_matrix must be 4x4")
        if hermiticity_defect(rho) > 1e-9 or abs(complex(np.trace(rho)).real - 1.0) > 1e-9:
            raise ConfigError("state_matrix must be Hermitian with unit trace")
        ec_value = expectation(ec.matrix, rho)
    elif "state" in cfg:
        rho, _ = _build_state(cfg, 2)
        ec_value = expectation(ec.matrix, rho)

    passed = (
        all(v <= EXACT_IDENTITY_TOL for v in residuals.values())
        and all(v >= -CYCLE_PSD_TOL for v in min_eigs.values())
        and all(v <= 1e-10 for v in pair_norms.values())
    )
    results = {
        "compatibility_norms": pair_norms,
        "identity_residuals": residuals,
        "min_eigenvalues": min_eigs,
        "ec_expectation": ec_value,
        "classical_bound": 2.0,
        "passed": passed,
    }
    return results, EXIT_OK if passed else EXIT_CHECK_FAILED


_HANDLERS = {
    "verify": cmd_verify,
    "bounds": cmd_bounds,
    "optimize": cmd_optimize,
    "witness": cmd_witness,
    "contextuality": cmd_contextuality,
}


def _parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="qwitness",
        description="Quantumness-witness toolkit: operator identities, classical "
        "bounds, setting optimization, and witness evaluation.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name, help_text in (
        ("verify", "check the witness operator identities"),
        ("bounds", "classical / hybrid / noncontextual bounds by enumeration"),
        ("optimize", "maximize inequality violation over settings"),
        ("witness", "evaluate the total witness on a state"),
        ("contextuality", "check the 4-cycle noncontextuality construction"),
    ):
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--config", help="JSON config file; flags override its fields")
        p.add_argument("--n", type=int, help="number of parties")
        p.add_argument("--state", help="state tag: ghz | mixed | product | noisy-ghz:V")
        p.add_argument("--optimize", action="store_true", help="optimize settings first")
        p.add_argument("--random", type=int, metavar="K", help="number of random settings draws")
        p.add_argument("--seed", type=int, help="seed for all pseudo-random draws")
        p.add_argument("--out", help="also write the report to this path")
        if name == "verify":
            p.add_argument(
                "--corrupt-sign",
                type=int,
                metavar="W",
                help="fault-injection hook: flip the sign coefficient at word W",
            )
    return parser


def _merge_config(args: argparse.Namespace) -> dict:
    cfg: dict = {}
    if args.config:
        try:
            with open(args.config, encoding="utf-8") as fh:
                file_cfg = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config file: {exc}")
        if not isinstance(file_cfg, dict):
            raise ConfigError("config file must hold a JSON object")
        cfg.update(file_cfg)
    if args.n is not None:
        cfg["n_parties"] = args.n
    if args.state is not None:
        cfg["state"] = args.state
    if args.seed is not None:
        cfg["seed"] = args.seed
    if args.random is not None:
        cfg["random_trials"] = args.random
    if args.optimize:
        cfg["optimize"] = True
    if args.out is not None:
        cfg["output_path"] = args.out
    if getattr(args, "corrupt_sign", None) is not None:
        cfg["corrupt_sign"] = args.corrupt_sign
    cfg["command"] = args.command
    cfg.setdefault("n_parties", 3)
    cfg.setdefault("seed", 1)
    if not isinstance(cfg["n_parties"], int):
        raise ConfigError("n_parties must be an integer")
    return cfg


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    started = time.perf_counter()
    try:
        cfg = _merge_config(args)
        results, code = _HANDLERS[args.command](cfg)
    except ConfigError as exc:
        print(f"qwitness: invalid config: {exc}", file=sys.stderr)
        return EXIT_INVALID_CONFIG
    except CapExceededError as exc:
        print(f"qwitness: {exc}", file=sys.stderr)
        return EXIT_CAP_EXCEEDED
    except ValueError as exc:
        print(f"qwitness: invalid config: {exc}", file=sys.stderr)
        return EXIT_INVALID_CONFIG

    report = {
        "command": args.command,
        "inputs_digest": _inputs_digest(cfg),
        "results": results,
        "artifact_version": __version__,
        "wall_time_ms": int(round((time.perf_counter() - started) * 1000.0)),
    }
    text = canonical_json(report)
    sys.stdout.write(text)
    out_path = cfg.get("output_path")
    if out_path:
        try:
            with open(out_path, "w", encoding="utf-8") as fh:
                fh.write(text)
        except OSError as exc:
            print(f"qwitness: cannot write report: {exc}", file=sys.stderr)
            return EXIT_INVALID_CONFIG
    return code


if __name__ == "__main__":
    sys.exit(main())
