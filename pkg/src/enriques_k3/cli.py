"""Command line driver: batch verification, model export and small utilities."""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import dataclass
from pathlib import Path

from . import __version__, checks, dynkin, fibrations, pg4, quotient


@dataclass
class VerificationReport:
    scope: str
    results: list

    @property
    def passed(self) -> int:
        return sum(r.passed for r in self.results)

    @property
    def failed(self) -> int:
        return len(self.results) - self.passed

    @property
    def exit_code(self) -> int:
        return 0 if self.failed == 0 else 1

    def to_dict(self) -> dict:
        return {
            "tool": f"enriques_k3 {__version__}",
            "python": f"{sys.version_info.major}.{sys.version_info.minor}",
            "scope": self.scope,
            "summary": {"total": len(self.results), "passed": self.passed, "failed": self.failed},
            "checks": [r.to_dict() for r in self.results],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n"

    def to_text(self) -> str:
        lines = [f"enriques_k3 {__version__} verification, scope {self.scope}"]
        for r in self.results:
            lines.append(f"[{'PASS' if r.passed else 'FAIL'}] {r.id}: {r.description}")
            if not r.passed:
                lines.append("       witness: " + json.dumps(r.witness, sort_keys=True))
        lines.append(f"{self.passed} passed, {self.failed} failed")
        return "\n".join(lines) + "\n"


def run_verification_suite(scope: str = "all", fault: str | None = None) -> VerificationReport:
    results = [checks.run_check(c, scope, fault) for c in checks.checks_for(scope)]
    return VerificationReport(scope, results)


# ---------------------------------------------------------------------------


def _write(text: str, out: str | None, name: str) -> None:
    if out is None:
        sys.stdout.write(text)
        return
    d = Path(out)
    d.mkdir(parents=True, exist_ok=True)
    (d / name).write_text(text)


def cmd_verify(args) -> int:
    report = run_verification_suite(args.scope, args.inject_fault)
    text = report.to_json() if args.format == "json" else report.to_text()
    try:
        _write(text, args.out, f"report-{args.scope}.{'json' if args.format == 'json' else 'txt'}")
    except OSError as exc:
        print(f"error: cannot write report: {exc}", file=sys.stderr)
        return 2
    return report.exit_code


def cmd_model(args) -> int:
    xm = quotient.build_surface(args.kind)
    print(xm.to_json() if args.format == "json" else xm.to_dot())
    return 0


def cmd_pg4(args) -> int:
    plane = pg4.build_plane()
    if args.what == "hyperovals":
        rows = [list(h.points) for h in pg4.hyperovals(plane)]
    elif args.what == "mi-base":
        rows = [
            {"base": list(c.base), "trisecants": list(c.trisecants), "tangents": list(c.tangents),
             "triangles": [list(t) for t in c.triangles]}
            for c in pg4.mi_base_configurations(plane)
        ]
    else:
        flag = pg4.default_mii_flag(plane)
        rows = [list(h.points) for h in pg4.mii_special_hyperovals(plane, flag)]
    print(json.dumps({"what": args.what, "count": len(rows), "items": rows}))
    return 0


def cmd_fib(args) -> int:
    try:
        cfg = fibrations.FibrationConfig.parse(args.config, args.ambient)
        rep = fibrations.audit_fibration(cfg)
    except fibrations.FibrationError as exc:
        print(json.dumps({"config": args.config, "error": str(exc)}))
        return 1
    print(rep.to_json())
    return 0


def cmd_vinberg(args) -> int:
    try:
        graph = dynkin.WeightedGraph.from_json(Path(args.graph).read_text())
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    try:
        rep = dynkin.vinberg_check(graph, args.rank)
    except dynkin.GraphError as exc:
        print(json.dumps({"error": str(exc)}))
        return 1
    print(json.dumps({
        "verdict": rep.verdict,
        "nondegenerate": rep.nondegenerate,
        "span_signature": list(rep.span_signature),
        "triple_edge_free": rep.triple_edge_free,
        "failures": [list(f) for f in rep.failures],
    }))
    return 0 if rep.verdict else 1


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="enriques-k3", description=__doc__)
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", required=True)

    v = sub.add_parser("verify", help="run the verification checks")
    v.add_argument("--scope", choices=checks.SCOPES, default="all")
    v.add_argument("--out", help="directory for the report (default: stdout)")
    v.add_argument("--format", choices=("json", "text"), default="text")
    v.add_argument("--inject-fault", choices=("ns-gram",), help="corrupt an input on purpose (negative control)")
    v.set_defaults(func=cmd_verify)

    m = sub.add_parser("model", help="surface models")
    msub = m.add_subparsers(dest="action", required=True)
    b = msub.add_parser("build")
    b.add_argument("--kind", choices=quotient.KINDS, required=True)
    b.add_argument("--format", choices=("json", "dot"), default="json")
    b.set_defaults(func=cmd_model)

    g = sub.add_parser("pg4", help="the plane of order 4")
    gsub = g.add_subparsers(dest="action", required=True)
    e = gsub.add_parser("enumerate")
    e.add_argument("--what", choices=("hyperovals", "mi-base", "mii-special"), required=True)
    e.set_defaults(func=cmd_pg4)

    f = sub.add_parser("fib", help="fibration arithmetic")
    fsub = f.add_subparsers(dest="action", required=True)
    a = fsub.add_parser("audit")
    a.add_argument("--config", required=True, help='fiber list, e.g. "I6,I6,I6,I6"')
    a.add_argument("--ambient", default="k3", choices=sorted(fibrations.AMBIENTS))
    a.set_defaults(func=cmd_fib)

    w = sub.add_parser("vinberg", help="Vinberg condition for a graph")
    wsub = w.add_subparsers(dest="action", required=True)
    c = wsub.add_parser("check")
    c.add_argument("--graph", required=True, help="graph JSON file")
    c.add_argument("--rank", type=int, required=True, help="n for a lattice of signature (1, n)")
    c.set_defaults(func=cmd_vinberg)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
