import argparse
import logging
import time
from traceback import format_exc

from django.core.management.base import BaseCommand, CommandError

from ... import af, sft, towers, zn_lab
from ...conf import get_setting
from ...documents import (
    read_clopen,
    read_diagram,
    read_element,
    read_floor_sets,
    read_heights,
    read_matrix,
    read_paths,
    read_tableau,
    read_towers,
    read_zn_config,
)
from ...exceptions import DomainViolation, EtaleHomologyError, ExitCodes
from ...logging import logger
from ...models import ComputationReport
from ...registry import suites_registry
from ...report import Report

# options echoed in the report inputs
INPUT_KEYS = [
    "matrix",
    "diagram",
    "tableau",
    "clopen",
    "source",
    "target_document",
    "elements",
    "towers",
    "floors",
    "heights",
    "config",
    "degree",
    "depth",
    "budget",
    "method",
    "model",
    "window",
    "target",
    "N",
    "m",
    "n",
    "ms",
    "suite",
    "seed",
    "cases",
]

# where the result of each computation comes from; `sft homology` reports its --method
PROVENANCES = {
    "sft index": "truncation",
    "sft find-index": "search",
    "sft class": "matrix",
    "af class": "matrix",
    "af transport": "construction",
    "af riesz": "construction",
    "af h1check": "truncation",
    "towers match": "construction",
    "towers extend": "construction",
    "towers reduce": "construction",
    "zn ratio": "construction",
    "zn bound": "matrix",
    "zn sweep": "construction",
    "check": "suite",
}


class Command(BaseCommand):
    help = "Compute homology, indices and full group elements of étale groupoids"

    def add_arguments(self, parser):
        common = argparse.ArgumentParser(add_help=False)
        common.add_argument(
            "--json",
            action="store_true",
            help="print the machine-readable report instead of text",
        )
        common.add_argument(
            "--save",
            action="store_true",
            help="store the report in the database",
        )

        groups = parser.add_subparsers(dest="group", required=True)

        sft_actions = groups.add_parser("sft", help="shifts of finite type").add_subparsers(dest="action", required=True)
        homology = sft_actions.add_parser("homology", parents=[common], help="H0 or H1 of the SFT groupoid")
        self._add_matrix(homology)
        homology.add_argument("--degree", type=int, choices=[0, 1], default=0)
        homology.add_argument("--method", choices=["matrix", "truncation", "both"], default="both")
        homology.add_argument("--model", choices=sft.MODELS, default="groupoid", help="truncated complex to use")
        self._add_depth(homology)
        index = sft_actions.add_parser("index", parents=[common], help="index of a tableau in H1")
        self._add_matrix(index)
        index.add_argument("--tableau", required=True, help="tableau document")
        self._add_depth(index)
        find_index = sft_actions.add_parser("find-index", parents=[common], help="search a tableau by index")
        self._add_matrix(find_index)
        find_index.add_argument("--target", type=int, nargs="+", required=True, help="coordinates of the index")
        find_index.add_argument("--budget", type=int, help="number of candidate tableaux to try")
        find_index.add_argument("--depth", type=int, default=2, help="longest word of the candidates")
        find_index.add_argument("--window", type=int, help="stabilization window")
        sft_class = sft_actions.add_parser("class", parents=[common], help="class of a clopen set in H0")
        self._add_matrix(sft_class)
        sft_class.add_argument("--clopen", required=True, help="clopen document")

        af_actions = groups.add_parser("af", help="AF groupoids of Bratteli diagrams").add_subparsers(
            dest="action", required=True
        )
        af_class = af_actions.add_parser("class", parents=[common], help="class of a clopen set in H0")
        self._add_diagram(af_class)
        af_class.add_argument("--clopen", required=True, help="paths document")
        af_class.add_argument("--to", dest="target_document", help="paths document to compare with")
        af_class.add_argument("--budget", type=int)
        transport = af_actions.add_parser("transport", parents=[common], help="involution mapping U onto V")
        self._add_diagram(transport)
        transport.add_argument("--from", dest="source", required=True, help="paths document of U")
        transport.add_argument("--to", dest="target_document", required=True, help="paths document of V")
        transport.add_argument("--budget", type=int)
        riesz = af_actions.add_parser("riesz", parents=[common], help="interpolant of f1, f2 <= g1, g2")
        self._add_diagram(riesz)
        riesz.add_argument("--elements", nargs=4, required=True, metavar=("F1", "F2", "G1", "G2"))
        riesz.add_argument("--budget", type=int)
        h1check = af_actions.add_parser("h1check", parents=[common], help="homology of the elementary levels")
        self._add_diagram(h1check)
        h1check.add_argument("--depth", type=int, default=4, help="last level to check")

        towers_actions = groups.add_parser("towers", help="tower partitions").add_subparsers(
            dest="action", required=True
        )
        match = towers_actions.add_parser("match", parents=[common], help="bisections between floor sets")
        match.add_argument("--towers", required=True, help="tower partition document")
        match.add_argument("--from", dest="source", help="floor set document of U (match_equal)")
        match.add_argument("--floors", help="floor sets document U_1..U_r (match_subsets)")
        match.add_argument("--to", dest="target_document", required=True, help="floor set document of V or O")
        extend = towers_actions.add_parser("extend", parents=[common], help="tower extension by heights")
        extend.add_argument("--towers", required=True)
        extend.add_argument("--heights", required=True)
        reduce = towers_actions.add_parser("reduce", parents=[common], help="reduction to a full clopen set")
        reduce.add_argument("--towers", required=True)
        reduce.add_argument("--floors", required=True, help="floor set document of Y")

        zn_actions = groups.add_parser("zn", help="Voronoi marker partitions of ℤᴺ").add_subparsers(
            dest="action", required=True
        )
        ratio = zn_actions.add_parser("ratio", parents=[common], help="boundary ratio of a configuration")
        ratio.add_argument("--config", help="configuration document (overrides --N/--m/--window)")
        self._add_zn(ratio)
        ratio.add_argument("--m", type=int, default=8)
        ratio.add_argument("--window", type=int)
        bound = zn_actions.add_parser("bound", parents=[common], help="ratio bound of separated marker sets")
        self._add_zn(bound)
        bound.add_argument("--m", type=int, required=True)
        sweep = zn_actions.add_parser("sweep", parents=[common], help="boundary ratios over grid spacings")
        self._add_zn(sweep)
        sweep.add_argument("--ms", type=int, nargs="+", default=[8, 16, 32, 64])
        sweep.add_argument("--csv", help="write the rows to this file")

        check = groups.add_parser("check", parents=[common], help="run property suites")
        check.add_argument("suite", help="suite name, or 'all'")
        check.add_argument("--seed", type=int, help="random seed (defaults to ETALE_DEFAULT_SEED)")
        check.add_argument("--cases", type=int, help="number of generated cases")
        check.add_argument("--slow", action="store_true", help="include slow suites in 'all'")

    def _add_matrix(self, parser):
        parser.add_argument("--matrix", required=True, help="adjacency matrix document")

    def _add_diagram(self, parser):
        parser.add_argument("--diagram", required=True, help="Bratteli diagram document")

    def _add_depth(self, parser):
        parser.add_argument("--depth", type=int, help="deepest truncation level")
        parser.add_argument("--window", type=int, help="stabilization window")

    def _add_zn(self, parser):
        parser.add_argument("--N", type=int, default=2, help="dimension")
        parser.add_argument("--n", type=int, default=1, help="radius of the moves")

    def handle(self, *args, **options):
        self.verbosity = int(options["verbosity"])
        if self.verbosity == 0:
            logger.setLevel(logging.WARNING)
        elif self.verbosity == 1:
            logger.setLevel(logging.INFO)
        else:
            logger.setLevel(logging.DEBUG)

        computation = " ".join(filter(None, [options["group"], options.get("action")]))
        inputs = {k: options[k] for k in INPUT_KEYS if options.get(k) is not None}
        handler = getattr(self, f"do_{computation.replace(' ', '_').replace('-', '_')}")
        provenance = options["method"] if computation == "sft homology" else PROVENANCES[computation]

        logger.info(f"Starting '{computation}'...")
        start = time.perf_counter()
        exc, result = None, None
        try:
            payload, result, exit_code = handler(options)
        except EtaleHomologyError as e:
            exc = e
            logger.error(f"{type(e).__name__}: {e}")
            payload, exit_code = {"error": type(e).__name__, "message": str(e)}, e.exit_code
        except Exception as e:
            exc = e
            logger.critical(f"Crashed unhandled exception: {e}")
            exit_code = ExitCodes.CRASHED
            payload = {"error": type(e).__name__, "message": str(e), "traceback": format_exc()}

        report = Report(
            computation=computation,
            inputs=inputs,
            payload=payload,
            provenance=provenance,
            exit_code=int(exit_code),
            timing={"seconds": time.perf_counter() - start},
        )
        logger.info(f"Finished '{computation}' with exit code {report.exit_code}")

        if options["save"]:
            ComputationReport.from_report(report, result)
        self.stdout.write(report.to_json() if options["json"] else report.to_text())

        if report.exit_code:
            raise CommandError(payload.get("message", ""), returncode=report.exit_code) from exc

    # sft

    def do_sft_homology(self, options):
        system = read_matrix(options["matrix"])
        degree, method = options["degree"], options["method"]
        payload = {"degree": degree}
        groups = []
        if method in ("matrix", "both"):
            group = sft.h0_group(system) if degree == 0 else sft.h1_group(system)
            payload["matrix"] = str(group)
            payload["matrix_invariants"] = group.to_dict()
            groups.append(group)
        if method in ("truncation", "both"):
            group, level = sft.stabilized_homology(
                system, degree, options["depth"], options["model"], options["window"]
            )
            payload["truncation"] = str(group)
            payload["truncation_invariants"] = group.to_dict()
            payload["stabilized_at"] = level
            groups.append(group)
        exit_code = ExitCodes.SUCCESS
        if method == "both":
            payload["match"] = groups[0] == groups[1]
            if not payload["match"]:
                logger.error(f"The methods disagree: {groups[0]} vs {groups[1]}")
                exit_code = ExitCodes.CRASHED
        return payload, groups[-1], exit_code

    def do_sft_index(self, options):
        system = read_matrix(options["matrix"])
        tableau = read_tableau(options["tableau"])
        value = sft.index_of(system, tableau, options["depth"], options["window"])
        payload = {"tableau": tableau.to_dict(), "index": value.to_dict(), "h1": str(sft.h1_group(system))}
        return payload, value, ExitCodes.SUCCESS

    def do_sft_find_index(self, options):
        system = read_matrix(options["matrix"])
        tableau = sft.find_with_index(
            system,
            options["target"],
            budget=options["budget"],
            max_depth=options["depth"],
            window=options["window"],
        )
        value = sft.index_of(system, tableau, window=options["window"])
        payload = {"tableau": tableau.to_dict(), "index": value.to_dict()}
        return payload, tableau, ExitCodes.SUCCESS

    def do_sft_class(self, options):
        system = read_matrix(options["matrix"])
        clopen = sft.canonical_clopen(system, read_clopen(options["clopen"]))
        coordinates = sft.h0_class(system, clopen)
        payload = {
            "h0": str(sft.h0_group(system)),
            "class": list(coordinates),
            "unit": list(sft.unit_class(system)),
        }
        return payload, coordinates, ExitCodes.SUCCESS

    # af

    def do_af_class(self, options):
        diagram = read_diagram(options["diagram"])
        u = af.class_of_clopen(diagram, read_paths(options["clopen"]))
        payload = {"class": u.to_dict(), "order_unit_multiple": af.order_unit_check(diagram, u)}
        exit_code = ExitCodes.SUCCESS
        if options["target_document"]:
            v = af.class_of_clopen(diagram, read_paths(options["target_document"]))
            decision, level = af.compare_classes(diagram, u, v, options["budget"])
            payload.update({"other": v.to_dict(), "equal": decision.value, "certified_at": level})
            if decision == af.Decision.UNDECIDED:
                exit_code = ExitCodes.UNDECIDED
        return payload, u, exit_code

    def do_af_transport(self, options):
        diagram = read_diagram(options["diagram"])
        u, v = read_paths(options["source"]), read_paths(options["target_document"])
        gamma = af.transport_hopf2(diagram, u, v, options["budget"])
        payload = {"tableau": gamma.to_dict(), "pairs": len(gamma.pairs)}
        return payload, gamma, ExitCodes.SUCCESS

    def do_af_riesz(self, options):
        diagram = read_diagram(options["diagram"])
        f1, f2, g1, g2 = (read_element(path, diagram) for path in options["elements"])
        h = af.riesz_interpolate(diagram, f1, f2, g1, g2, options["budget"])
        return {"h": h.to_dict()}, h, ExitCodes.SUCCESS

    def do_af_h1check(self, options):
        diagram = read_diagram(options["diagram"])
        checks = af.af_h1_check(diagram, options["depth"])
        payload = {"levels": [c.to_dict() for c in checks], "ok": all(c.ok for c in checks)}
        exit_code = ExitCodes.SUCCESS if payload["ok"] else ExitCodes.SUITE_FAILED
        return payload, checks, exit_code

    # towers

    def do_towers_match(self, options):
        partition = read_towers(options["towers"])
        target = read_floor_sets(options["target_document"], partition)[0]
        if options["floors"]:
            subsets = read_floor_sets(options["floors"], partition)
            bisections = towers.match_subsets(subsets, target)
            payload = {"bisections": [b.to_dict() for b in bisections]}
            return payload, bisections, ExitCodes.SUCCESS
        if not options["source"]:
            raise DomainViolation("towers match needs --from or --floors")
        source = read_floor_sets(options["source"], partition)[0]
        bisection = towers.match_equal(source, target)
        payload = {"bisection": bisection.to_dict()}
        if source.is_disjoint(target):
            involution = towers.involution_from_bisection(bisection)
            payload["involution"] = involution.to_dict()
        return payload, bisection, ExitCodes.SUCCESS

    def do_towers_extend(self, options):
        partition = read_towers(options["towers"])
        heights = read_heights(options["heights"])
        extended = towers.tower_extend(partition, heights)
        payload = {"towers": extended.to_dict(), "base": towers.base_floors(partition, heights).to_dict()}
        return payload, extended, ExitCodes.SUCCESS

    def do_towers_reduce(self, options):
        partition = read_towers(options["towers"])
        full = read_floor_sets(options["floors"], partition)[0]
        reduced, heights = towers.reduce_full_clopen(partition, full)
        payload = {"towers": reduced.to_dict(), "heights": {c: list(h) for c, h in heights.items()}}
        return payload, (reduced, heights), ExitCodes.SUCCESS

    # zn

    def do_zn_ratio(self, options):
        if options["config"]:
            config, n = read_zn_config(options["config"])
        else:
            config, n = zn_lab.MarkerConfiguration.grid(options["N"], options["m"], options["window"]), options["n"]
        assignment = zn_lab.assign_markers(config)
        ratio = zn_lab.boundary_ratio(config, n, assignment)
        separation, syndeticity = zn_lab.separation_syndeticity(config, assignment)
        payload = {
            "config": config.to_dict(),
            "n": n,
            "ratio": str(ratio),
            "ratio_float": float(ratio),
            "separation": separation,
            "syndeticity": syndeticity,
            "bound": None,
        }
        m = config.m
        if m is not None and m > 2 * n + 2 and m > 4 and zn_lab.is_separated_syndetic(config, m, assignment):
            payload["bound"] = str(zn_lab.separated_marker_bound(m, n, config.N))
        return payload, ratio, ExitCodes.SUCCESS

    def do_zn_bound(self, options):
        bound = zn_lab.separated_marker_bound(options["m"], options["n"], options["N"])
        payload = {"bound": str(bound), "bound_float": float(bound)}
        return payload, bound, ExitCodes.SUCCESS

    def do_zn_sweep(self, options):
        rows = zn_lab.sweep(options["ms"], options["n"], options["N"])
        text = zn_lab.sweep_csv(rows)
        if options["csv"]:
            with open(options["csv"], "w", encoding="utf-8") as f:
                f.write(text)
            logger.info(f"Wrote {len(rows)} rows to {options['csv']}")
        payload = {"rows": [row.to_dict() for row in rows]}
        return payload, rows, ExitCodes.SUCCESS

    # suites

    def do_check(self, options):
        name = options["suite"]
        if name == "all":
            include_slow = options["slow"] or get_setting("ETALE_SLOW_SUITES")
            suites = [s for s in suites_registry.values() if include_slow or not s.slow]
        elif name in suites_registry:
            suites = [suites_registry[name]]
        else:
            raise DomainViolation(f"Unknown suite '{name}', expected one of {', '.join(suites_registry)} or 'all'")

        results = [suite.run(seed=options["seed"], cases=options["cases"]) for suite in suites]
        payload = {"suites": [r.to_dict() for r in results], "ok": all(r.ok for r in results)}
        exit_code = ExitCodes.SUCCESS if payload["ok"] else ExitCodes.SUITE_FAILED
        return payload, results, exit_code
