import argparse
import asyncio
import csv
import io
import json
import os
import sys
from typing import Any, Dict, List, Optional, Sequence, Tuple

from src import __version__
from src.actions import DatabaseRecorder, ManifestDispatcher, ManifestFileLogger
from src.catalog import (
    CatalogError,
    binomial_terms,
    catalog_checksum,
    catalog_entries,
    catalog_export,
    catalog_get,
    catalog_list,
    recurrence_terms,
)
from src.config import Settings, get_settings
from src.congruence import (
    CongruenceFamily,
    CongruenceReport,
    as_source,
    d3_check,
    expected_verdict,
    gauss_check,
    lemma_grid,
    lucas_check,
    shifted_gauss_check,
    valuation_bound_check,
)
from src.database import Database
from src.index_sets import prop12_terms
from src.laurent import ct_sequence, poly_parse
from src.polytope import origin_only_interior
from src.search import preset_config, run_search
from src.verifier import CatalogVerifier, PROP12_SEQUENCES, check_polytope

EXIT_OK, EXIT_FAILED, EXIT_ERROR = 0, 1, 2

CONGRUENCE_FAMILIES = ("gauss", "lucas", "d3", "valuation", "lemmas", "shifted_gauss")


def _log(message: str):
    if get_settings().verbose:
        print(f"[MAIN] {message}", file=sys.stderr)


def _strs(values: Sequence[int]) -> List[str]:
    return [str(v) for v in values]


def _primes(text: str) -> List[int]:
    return [int(p) for p in text.split(",") if p.strip()]


class SporadicApp:
    HANDLERS = {"verify": "verify_all"}

    def __init__(self, settings: Settings):
        self.settings = settings
        self.database = Database(settings.database_url) if settings.enable_database else None
        self.dispatcher = ManifestDispatcher(verbose=settings.verbose)
        self._setup_sinks()

    def _setup_sinks(self):
        if self.settings.enable_manifest_file:
            self.dispatcher.add_sink(ManifestFileLogger(self.settings.manifest_directory, self.settings.verbose))
        if self.database is not None:
            self.dispatcher.add_sink(DatabaseRecorder(self.database, self.settings.verbose))
        _log(f"Manifest sinks: {', '.join(self.dispatcher.sinks) or 'none'}")

    async def execute(self, args: argparse.Namespace) -> Tuple[Dict[str, Any], int]:
        handler = getattr(self, f"cmd_{self.HANDLERS.get(args.command, args.command)}")
        return await handler(args)

    # ------------------------------------------------------------- terms

    async def cmd_terms(self, args) -> Tuple[dict, int]:
        if args.N < 0:
            raise CatalogError(f"N must be non-negative, got {args.N}")
        entry = catalog_get(args.name)
        if args.rep == "all":
            columns = {"recurrence": recurrence_terms(entry.recurrence, args.N)}
            for formula in entry.binomial_formulas:
                columns[f"binomial:{formula}"] = binomial_terms(entry.name, args.N, formula)
            for rep in entry.representations:
                columns[f"ct:{rep.label}"] = ct_sequence(rep.poly, args.N)
            if entry.name in PROP12_SEQUENCES:
                columns["prop12"] = prop12_terms(entry.name, args.N)
            reference = columns["recurrence"]
            agreement = all(values == reference for values in columns.values())
            payload = {
                "sequence": entry.name,
                "representation": "all",
                "N": args.N,
                "terms": _strs(reference),
                "representations": {label: _strs(values) for label, values in columns.items()},
                "agreement": agreement,
            }
            return payload, EXIT_OK if agreement else EXIT_FAILED

        if args.rep == "recurrence":
            values = recurrence_terms(entry.recurrence, args.N)
        elif args.rep == "binomial":
            values = binomial_terms(entry.name, args.N, args.label)
        elif args.rep == "prop12":
            values = prop12_terms(entry.name, args.N)
        else:
            reps = {rep.label: rep for rep in entry.representations}
            label = args.label or entry.representations[0].label
            if label not in reps:
                raise CatalogError(f"{entry.name} has no CT representation {label!r}; choose from {sorted(reps)}")
            values = ct_sequence(reps[label].poly, args.N)
        return {"sequence": entry.name, "representation": args.rep, "N": args.N, "terms": _strs(values)}, EXIT_OK

    # ------------------------------------------------------------ verify

    async def cmd_verify_all(self, args) -> Tuple[dict, int]:
        verifier = CatalogVerifier(
            depth_2var=args.depth_2var,
            depth_3var=args.depth_3var,
            prop12_depth=args.prop12_depth,
            diagonal_depth=args.diagonal_depth,
            shuffle_seed=args.seed,
        )
        summary = await verifier.run()
        payload = summary.to_json()
        payload["depths"] = {"2var": verifier.depth_2var, "3var": verifier.depth_3var,
                             "prop12": verifier.prop12_depth, "diagonal": verifier.diagonal_depth}
        return payload, EXIT_OK if summary.passed else EXIT_FAILED

    # -------------------------------------------------------- congruence

    async def cmd_congruence(self, args) -> Tuple[dict, int]:
        family = args.family
        primes = _primes(args.p)
        if family == "lemmas":
            reports = lemma_grid(args.nmax, primes)
            expected: Optional[bool] = True
            subject = "binomial"
        elif family == "shifted_gauss":
            poly = self._shift_poly(args)
            subject = args.sequence
            reports = [shifted_gauss_check(poly, _primes(args.n_vec), args.n, primes, args.r, args.kmax)]
            expected = None
        else:
            if not args.sequence:
                raise CatalogError(f"the {family} check needs a sequence name")
            source = as_source(args.sequence, args.source)
            subject = source.label
            reports = self._congruence_reports(family, source, primes, args)
            entry = catalog_get(args.sequence) if args.sequence in catalog_list() else None
            expected = expected_verdict(CongruenceFamily(family), entry, args.r)

        passed = all(report.passed for report in reports)
        payload = {
            "family": family,
            "sequence": subject,
            "source": "ct" if family == "shifted_gauss" else args.source,
            "reports": [report.to_json() for report in reports],
            "passed": passed,
            "expected": expected,
        }
        return payload, EXIT_FAILED if expected and not passed else EXIT_OK

    def _shift_poly(self, args):
        if not args.sequence:
            raise CatalogError("the shifted_gauss check needs a sequence name or a Laurent polynomial")
        if not args.n_vec:
            raise CatalogError("the shifted_gauss check needs --n-vec")
        if args.sequence not in catalog_list():
            return poly_parse(args.sequence, len(_primes(args.n_vec)), self.settings.max_exponent)
        entry = catalog_get(args.sequence)
        reps = {rep.label: rep for rep in entry.representations}
        label = args.label or entry.representations[0].label
        if label not in reps:
            raise CatalogError(f"{entry.name} has no CT representation {label!r}; choose from {sorted(reps)}")
        return reps[label].poly

    @staticmethod
    def _congruence_reports(family: str, source, primes: List[int], args) -> List[CongruenceReport]:
        if family == "gauss":
            return [gauss_check(source, args.r, primes, args.kmax, args.nmax)]
        if family == "lucas":
            return [lucas_check(source, p, args.nmax) for p in primes]
        if family == "d3":
            return [d3_check(source, p, args.smax, args.mmax, args.nmax) for p in primes]
        return [valuation_bound_check(source, p, args.nmax) for p in primes]

    # ---------------------------------------------------------- polytope

    async def cmd_polytope(self, args) -> Tuple[dict, int]:
        if args.all or (args.target and args.target in catalog_list()):
            entries = catalog_entries() if args.all else [catalog_get(args.target)]
            events = [check_polytope(e) for e in entries if any(r.polytope_asserted for r in e.representations)]
            passed = all(event.passed for event in events)
            return {"checks": [event.to_json() for event in events], "passed": passed}, \
                EXIT_OK if passed else EXIT_FAILED
        if not args.target:
            raise CatalogError("give a catalog name, a Laurent polynomial or --all")
        poly = poly_parse(args.target, args.dim, self.settings.max_exponent)
        verdict = origin_only_interior(poly)
        return {"expression": poly.to_text(), "dim": args.dim, "verdict": verdict.to_json()}, EXIT_OK

    # ------------------------------------------------------------ search

    async def cmd_search(self, args) -> Tuple[dict, int]:
        overrides = {}
        if args.max_evaluations is not None:
            overrides["max_evaluations"] = args.max_evaluations
        config = preset_config(
            args.support_preset,
            args.dim,
            args.target,
            max_factors=args.max_factors,
            prefix_len=args.prefix,
            max_candidates=self.settings.search_max_candidates,
            **overrides,
        )
        result = await run_search(
            config,
            workers=args.workers,
            shard_size=args.shard_size,
            checkpoint_path=args.checkpoint,
            output_path=args.output,
        )
        return result.to_json(config), EXIT_OK

    # ----------------------------------------------------------- catalog

    async def cmd_catalog(self, args) -> Tuple[dict, int]:
        if args.action == "export":
            payload = catalog_export()
            payload["checksum"] = catalog_checksum()
            return payload, EXIT_OK
        rows = [
            {
                "name": e.name,
                "title": e.title,
                "dims": e.dims,
                "sporadic": e.sporadic,
                "expected_gauss_order": e.expected_gauss_order,
                "gauss_order_status": e.gauss_order_status.value,
                "polytope_origin_only": e.polytope_origin_only,
            }
            for e in catalog_entries()
        ]
        return {"sequences": rows}, EXIT_OK

    # --------------------------------------------------------- manifests

    async def cmd_manifests(self, args) -> Tuple[dict, int]:
        if self.database is None:
            raise CatalogError("the manifest database is disabled (SPORADIC_ENABLE_DATABASE=false)")
        await self.database.init_db()
        payload: Dict[str, Any] = {}
        if args.cleanup:
            payload["deleted"] = await self.database.cleanup_old_manifests(self.settings.cleanup_days)
        if args.stats:
            payload["statistics"] = await self.database.get_statistics()
        payload["manifests"] = await self.database.get_manifests(
            limit=args.limit,
            command_filter=args.filter_command,
            failures_only=args.failures_only,
        )
        return payload, EXIT_OK

    # --------------------------------------------------------- manifest

    def build_manifest(self, args: argparse.Namespace, outcome: dict, exit_code: int) -> dict:
        arguments = {k: v for k, v in sorted(vars(args).items())}
        return {
            "command": args.command,
            "config": {"settings": self.settings.model_dump(), "arguments": arguments},
            "versions": {"artifact": __version__, "catalog_checksum": catalog_checksum()},
            "outcome": outcome,
            "exit_code": exit_code,
        }

    async def record(self, manifest: dict):
        await self.dispatcher.dispatch(manifest)

    async def close(self):
        if self.database is not None:
            await self.database.close()


# -------------------------------------------------------------- rendering

def _table(header: Sequence[str], rows: Sequence[Sequence[Any]]) -> str:
    cells = [list(map(str, header))] + [[str(c) for c in row] for row in rows]
    widths = [max(len(row[i]) for row in cells) for i in range(len(header))]
    lines = ["  ".join(c.ljust(w) for c, w in zip(row, widths)).rstrip() for row in cells]
    lines.insert(1, "  ".join("-" * w for w in widths))
    return "\n".join(lines)


def render_pretty(command: str, payload: dict) -> str:
    if "error" in payload:
        return f"error ({payload['type']}): {payload['error']}"
    if command == "terms":
        columns = payload.get("representations") or {payload["representation"]: payload["terms"]}
        rows = [[n] + [values[n] for values in columns.values()] for n in range(payload["N"] + 1)]
        text = _table(["n"] + list(columns), rows)
        if "agreement" in payload:
            text += f"\nagreement: {payload['agreement']}"
        return text
    if command == "verify":
        rows = [[c["kind"], c["subject"], c["state"]] for c in payload["checks"]]
        return _table(["check", "subject", "state"], rows) + f"\npassed: {payload['passed']}"
    if command == "congruence":
        rows = [[r["family"], r["sequence"], json.dumps(r["tested_range"], sort_keys=True), r["verdict"],
                 json.dumps(r["counterexample"], sort_keys=True) if r["counterexample"] else ""]
                for r in payload["reports"]]
        return _table(["family", "sequence", "range", "verdict", "counterexample"], rows) + \
            f"\nexpected: {payload['expected']}"
    if command == "polytope" and "checks" in payload:
        rows = [[c["subject"], label, v["verdict"], v["witnesses"]]
                for c in payload["checks"] for label, v in c["detail"]["verdicts"].items()]
        return _table(["sequence", "representation", "origin_only", "witnesses"], rows)
    if command == "catalog" and "sequences" in payload and "checksum" not in payload:
        rows = [[s["name"], s["title"], s["dims"], s["expected_gauss_order"], s["gauss_order_status"]]
                for s in payload["sequences"]]
        return _table(["name", "title", "dims", "gauss order", "status"], rows)
    if command == "search":
        rows = [[m["matched_target"], m["canonical_key"], " * ".join(m["factors"])] for m in payload["matches"]]
        return _table(["target", "canonical form", "factors"], rows) + \
            f"\nevaluated: {payload['evaluated']} of about {payload['estimate']}, partial: {payload['partial']}"
    return json.dumps(payload, sort_keys=True, indent=2, ensure_ascii=False)


def render_csv(payload: dict) -> str:
    columns = payload.get("representations") or {payload["representation"]: payload["terms"]}
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(["n"] + list(columns))
    for n in range(payload["N"] + 1):
        writer.writerow([n] + [values[n] for values in columns.values()])
    return buffer.getvalue().rstrip("\n")


def render(args: argparse.Namespace, payload: dict) -> str:
    if getattr(args, "format", "json") == "csv" and "error" not in payload:
        return render_csv(payload)
    if args.pretty:
        return render_pretty(args.command, payload)
    return json.dumps(payload, sort_keys=True, separators=(",", ":"), ensure_ascii=False)


# ------------------------------------------------------------------ parser

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="sporadic", description="Apéry-like sequence toolkit")
    parser.add_argument("--config", type=str, default=None, help="Path to an env-style configuration file")
    parser.add_argument("--term-cap", type=int, default=None, help="Maximum number of terms in any product")
    parser.add_argument("--verbose", action="store_true", help="Print tagged diagnostics to stderr")
    parser.add_argument("--pretty", action="store_true", help="Human-readable tables instead of JSON")
    parser.add_argument("--seed", type=int, default=None, help="Shuffle check submission order (output unchanged)")
    sub = parser.add_subparsers(dest="command", required=True)

    terms = sub.add_parser("terms", help="Print the first N+1 terms of a catalog sequence")
    terms.add_argument("name")
    terms.add_argument("N", type=int)
    terms.add_argument("--rep", choices=("recurrence", "binomial", "ct", "prop12", "all"), default="recurrence")
    terms.add_argument("--label", default=None, help="CT representation label or binomial formula id")
    terms.add_argument("--format", choices=("json", "csv"), default="json")

    verify = sub.add_parser("verify", help="Cross-validate the whole catalog")
    verify.add_argument("--depth-2var", type=int, default=None)
    verify.add_argument("--depth-3var", type=int, default=None)
    verify.add_argument("--prop12-depth", type=int, default=8)
    verify.add_argument("--diagonal-depth", type=int)

    congruence = sub.add_parser("congruence", help="Check a congruence family on a sequence")
    congruence.add_argument("family", choices=CONGRUENCE_FAMILIES)
    congruence.add_argument("sequence", nargs="?", default=None)
    congruence.add_argument("--r", type=int, default=1)
    congruence.add_argument("--p", type=str, default="2,3,5", help="Comma-separated primes")
    congruence.add_argument("--kmax", type=int, default=2)
    congruence.add_argument("--nmax", type=int, default=3)
    congruence.add_argument("--smax", type=int, default=2)
    congruence.add_argument("--mmax", type=int, default=2)
    congruence.add_argument("--source", choices=("recurrence", "binomial", "ct"), default="recurrence")
    congruence.add_argument("--n-vec", default=None, help="Comma-separated shift vector for shifted_gauss")
    congruence.add_argument("--n", type=int, default=1, help="Base index for shifted_gauss")
    congruence.add_argument("--label", default=None, help="CT representation label for shifted_gauss")

    polytope = sub.add_parser("polytope", help="Newton polytope interior checks")
    polytope.add_argument("action", choices=("check",))
    polytope.add_argument("target", nargs="?", default=None, help="Catalog name or Laurent polynomial")
    polytope.add_argument("--all", action="store_true", help="Check every catalog entry")
    polytope.add_argument("--dim", type=int, default=3)

    search = sub.add_parser("search", help="Search good Laurent polynomials for target sequences")
    search.add_argument("--dim", type=int, default=2)
    search.add_argument("--target", action="append", required=True)
    search.add_argument("--max-factors", type=int, default=None)
    search.add_argument("--support-preset", default="linear")
    search.add_argument("--prefix", type=int, default=None)
    search.add_argument("--workers", type=int, default=None)
    search.add_argument("--shard-size", type=int, default=None)
    search.add_argument("--max-evaluations", type=int, default=None)
    search.add_argument("--checkpoint", default=None)
    search.add_argument("--output", default=None, help="Append matches as JSON lines")

    catalog = sub.add_parser("catalog", help="Inspect the sequence catalog")
    catalog.add_argument("action", choices=("export", "list"))
    catalog.add_argument("--format", choices=("json",), default="json")

    manifests = sub.add_parser("manifests", help="Query recorded run manifests")
    manifests.add_argument("--limit", type=int, default=20)
    manifests.add_argument("--command", dest="filter_command", default=None)
    manifests.add_argument("--failures-only", action="store_true")
    manifests.add_argument("--stats", action="store_true")
    manifests.add_argument("--cleanup", action="store_true")

    return parser


def _apply_overrides(args: argparse.Namespace):
    if args.config is not None:
        os.environ["SPORADIC_CONFIG_FILE"] = args.config
    if args.term_cap is not None:
        os.environ["SPORADIC_TERM_CAP"] = str(args.term_cap)
    if args.verbose:
        os.environ["SPORADIC_VERBOSE"] = "true"
    get_settings.cache_clear()


async def _run(args: argparse.Namespace, out) -> int:
    app = SporadicApp(get_settings())
    try:
        try:
            payload, exit_code = await app.execute(args)
        except (ValueError, KeyError) as e:
            payload, exit_code = {"error": str(e), "type": type(e).__name__}, EXIT_ERROR
            _log(f"✗ {type(e).__name__}: {e}")
        print(render(args, payload), file=out)
        await app.record(app.build_manifest(args, payload, exit_code))
        _log(f"Exit code {exit_code}")
        return exit_code
    finally:
        await app.close()


def run_cli(argv: Optional[Sequence[str]] = None, out=None) -> int:
    args = build_parser().parse_args(argv)
    _apply_overrides(args)
    return asyncio.run(_run(args, out or sys.stdout))


if __name__ == "__main__":
    sys.exit(run_cli())
