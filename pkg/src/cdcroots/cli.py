"""``chx``: construct, verify and correlate channels stored as JSON files.

Machine-readable results go to ``--out`` (or stdout); a short human summary
goes to stderr. Operation errors print ``{"error": code, "message": ...}``
and exit with status 1.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from dataclasses import dataclass

import numpy as np

from . import memory, roots, serialize
from .channels import Channel, is_completely_positive, structural_predicates
from .errors import ChannelError, InvalidDimensionError, NotARootError
from .fcs import chain_generator, check_k_dependence

KINDS = ("qubit-root", "perturb-root", "cb-bound", "forgetful", "counterexample")


@dataclass(frozen=True)
class CommandConfig:
    command: str
    kind: str | None = None
    inp: str | None = None
    out: str | None = None
    seed: int = 0
    tol: float = 1e-9
    d: int = 2
    l2: float = 0.5
    l3: float = 0.5
    theta: float = 0.0
    eps: str = "auto"
    delta: float = 0.25
    a: float = 0.1
    b: float = 0.1
    dM: int = 2
    dA: int = 2
    dB: int = 2
    eta: float | None = None
    spec: str | None = None
    samples: int = 200
    memory: bool = False

    def validate(self) -> None:
        if not self.tol > 0:
            raise ValueError("--tol must be positive")
        for name in ("d", "dM", "dA", "dB"):
            if getattr(self, name) < 2:
                raise InvalidDimensionError(f"--{name} must be >= 2")
        if self.samples < 1:
            raise ValueError("--samples must be positive")


def _emit(text: str, out: str | None) -> None:
    if out:
        with open(out, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _report(obj: dict) -> str:
    return json.dumps(obj, indent=1, allow_nan=False) + "\n"


def cmd_construct(cfg: CommandConfig) -> int:
    prov: dict = {"construction": cfg.kind}
    if cfg.kind == "qubit-root":
        spec = roots.QubitRootSpec(cfg.l2, cfg.l3, cfg.theta)
        obj = roots.qubit_maximal_root(spec)
        prov["parameters"] = spec.to_dict()
        summary = f"qubit root, lambda = ({cfg.l2}, {cfg.l3}), theta = {cfg.theta}"
    elif cfg.kind == "perturb-root":
        eps = cfg.eps if cfg.eps == "auto" else float(cfg.eps)
        obj, spec = roots.perturb_root(cfg.d, eps=eps)
        prov["parameters"] = spec.to_dict()
        prov["certified_interval"] = list(spec.certified_interval)
        summary = f"perturbation root, d = {cfg.d}, eps = {spec.eps:.6g} in [{spec.certified_interval[0]:.6g}, {spec.certified_interval[1]:.6g}]"
    elif cfg.kind == "cb-bound":
        res = roots.cb_lower_bound_root(cfg.d, cfg.delta)
        obj = res.channel
        prov["parameters"] = res.to_dict()
        summary = f"cb-bound root, d = {cfg.d}, witness = {res.witness:.12g} (bound {res.bound:.12g})"
    elif cfg.kind == "forgetful":
        if cfg.spec:
            with open(cfg.spec, encoding="utf-8") as fh:
                spec = serialize.forgetful_spec_from_dict(json.load(fh))
        else:
            spec = memory.jordan_tail_spec(cfg.dM, cfg.dA, cfg.dB, cfg.eta)
        obj, eta = memory.construct_strictly_forgetful(spec)
        prov["parameters"] = {**spec.to_dict(), "eta": eta}
        summary = f"strictly forgetful memory channel, eta = {eta:.6g}"
    elif cfg.kind == "counterexample":
        obj = memory.counterexample_channel(cfg.a, cfg.b)
        prov["parameters"] = {"kind": "counterexample", "a": cfg.a, "b": cfg.b}
        prov["certified_interval"] = [0.0, memory.counterexample_scale(cfg.a, cfg.b)]
        summary = f"non-forgetful memory channel, a = {cfg.a}, b = {cfg.b}"
    else:
        raise ValueError(f"unknown construction kind {cfg.kind!r}")
    _emit(serialize.dumps(obj, prov), cfg.out)
    print(summary, file=sys.stderr)
    return 0


def verify_channel(ch: Channel, tol: float = 1e-9) -> dict:
    cp, lam = is_completely_positive(ch)
    preds = structural_predicates(ch)
    try:
        rep = roots.verify_root_order(ch, tol=tol)
        order, residuals, blocks = rep.order, rep.residuals, rep.jordan_block_sizes
    except NotARootError:
        order, blocks = None, None
        residuals = roots.residual_ladder(ch, ch.dim**2)
    return {
        "cp": cp,
        "min_choi_eigenvalue": lam,
        "unital": preds["unital"],
        "tp": preds["trace_preserving_dual"],
        "root_order": order,
        "residuals": [float(r) for r in residuals],
        "jordan_block_sizes": blocks,
    }


def verify_memory(t: memory.MemoryChannel, tol: float = 1e-9) -> dict:
    cp, lam = memory.is_completely_positive(t)
    verdict = memory.is_strictly_forgetful(t, tol)
    out = verdict.to_dict()
    return {
        "cp": cp,
        "min_choi_eigenvalue": lam,
        "tp": memory.is_trace_preserving(t),
        "strictly_forgetful": out["strictly_forgetful"],
        "depth": out["depth"],
        "witness": out["witness_word"],
        "witness_states": out["witness_states"],
        "triangularizing_basis": out["triangularizing_basis"],
    }


def cmd_verify(cfg: CommandConfig) -> int:
    obj = serialize.load(cfg.inp)
    if cfg.memory or isinstance(obj, memory.MemoryChannel):
        if not isinstance(obj, memory.MemoryChannel):
            raise ValueError("--memory expects a memory-channel file")
        rep = verify_memory(obj, cfg.tol)
        print(f"cp={rep['cp']} tp={rep['tp']} strictly_forgetful={rep['strictly_forgetful']} "
              f"depth={rep['depth']} witness={rep['witness']}", file=sys.stderr)
    else:
        if not isinstance(obj, Channel):
            raise ValueError("verify expects a channel file")
        rep = verify_channel(obj, cfg.tol)
        print(f"cp={rep['cp']} unital={rep['unital']} tp={rep['tp']} root_order={rep['root_order']}",
              file=sys.stderr)
    _emit(_report(rep), cfg.out)
    return 0


def correlation_table(ch: Channel, samples: int = 200, seed: int = 0, tol: float = 1e-9) -> list[tuple[int, float]]:
    order = roots.verify_root_order(ch, tol=tol).order
    g = chain_generator(ch)
    return [
        (gap, check_k_dependence(g, gap, samples, tol, seed, order).max_violation)
        for gap in range(1, ch.dim**2 + 1)
    ]


def cmd_correlate(cfg: CommandConfig) -> int:
    ch = serialize.load(cfg.inp)
    if not isinstance(ch, Channel):
        raise ValueError("correlate expects a channel file")
    rows = correlation_table(ch, cfg.samples, cfg.seed, cfg.tol)
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\r\n")
    writer.writerow(["gap", "max_violation"])
    for gap, v in rows:
        writer.writerow([gap, repr(float(v))])
    _emit(buf.getvalue(), cfg.out)
    first = next((gap for gap, v in rows if v <= cfg.tol), None)
    print(f"violation first below {cfg.tol:g} at gap {first}", file=sys.stderr)
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="chx", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp):
        sp.add_argument("--out", help="output path (default: stdout)")
        sp.add_argument("--seed", type=int, default=0)
        sp.add_argument("--tol", type=float, default=1e-9)

    c = sub.add_parser("construct", help="build a channel or memory channel")
    c.add_argument("kind", choices=KINDS)
    common(c)
    c.add_argument("--d", type=int, default=2)
    c.add_argument("--l2", type=float, default=0.5)
    c.add_argument("--l3", type=float, default=0.5)
    c.add_argument("--theta", type=float, default=0.0)
    c.add_argument("--eps", default="auto")
    c.add_argument("--delta", type=float, default=0.25)
    c.add_argument("--a", type=float, default=0.1)
    c.add_argument("--b", type=float, default=0.1)
    c.add_argument("--dM", type=int, default=2)
    c.add_argument("--dA", type=int, default=2)
    c.add_argument("--dB", type=int, default=2)
    c.add_argument("--eta", type=float, default=None)
    c.add_argument("--spec", help="ForgetfulSpec JSON for kind 'forgetful'")

    v = sub.add_parser("verify", help="CP, normalisation and root order (or forgetfulness)")
    v.add_argument("--in", dest="inp", required=True)
    v.add_argument("--memory", action="store_true")
    common(v)

    r = sub.add_parser("correlate", help="CSV of k-dependence violation per gap")
    r.add_argument("--in", dest="inp", required=True)
    r.add_argument("--samples", type=int, default=200)
    common(r)
    return p


COMMANDS = {"construct": cmd_construct, "verify": cmd_verify, "correlate": cmd_correlate}


def main(argv=None) -> int:
    args = vars(build_parser().parse_args(argv))
    cfg = CommandConfig(**{k: v for k, v in args.items() if v is not None or k == "eta"})
    try:
        cfg.validate()
        return COMMANDS[cfg.command](cfg)
    except (ChannelError, ValueError, OSError, KeyError, json.JSONDecodeError) as exc:
        code = getattr(exc, "code", type(exc).__name__)
        sys.stdout.write(_report({"error": code, "message": str(exc)}))
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
