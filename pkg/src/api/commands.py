import argparse
import json
import sys
from pathlib import Path
from typing import List, Optional

from pydantic import ValidationError as ModelError

from src.api.models import CertificateModel, PresentationModel, RaagReport, RunConfig, VerdictModel
from src.core.cohomology_ring import massey_nontrivial, search_triples, verify_certificate
from src.core.config_space import chain_complex, export_chain_complex, homology
from src.core.graph_core import building_blocks, detect_nuclei, is_cactus, load_graph
from src.core.pipeline import OUT_OF_SCOPE, analyze, corpus_regression, presentation_dict, prepare
from src.core.spanning_order import LINEAR
from src.core.tietze_raag import raag_presentation, scr_presentation, verify_raag_iso
from src.utils.logger import logger
from src.validators import BraidLabError, PreconditionError, ValidationError, validate_coefficients


def _config(args) -> RunConfig:
    overrides = {"n": args.n} if getattr(args, "n", None) is not None else {}
    try:
        config = RunConfig(**overrides)
    except ModelError as e:
        raise ValidationError(str(e))
    config.apply()
    return config


def _emit(data, path: Optional[str]) -> None:
    text = json.dumps(data, indent=2, default=str)
    if path:
        Path(path).write_text(text + "\n")
        logger.info(f"Wrote {path}")
    else:
        print(text)


def cmd_analyze(args) -> int:
    config = _config(args)
    verdict = analyze(load_graph(args.graph), config.n, use_oracle=not args.no_oracle)
    model = VerdictModel(**verdict.to_dict())
    if args.json:
        _emit(model.model_dump(), args.json)
    print(f"{model.graph.name}: {model.route}" + (f" (nuclei: {', '.join(model.nuclei)})" if model.nuclei else ""))
    for note in model.notes:
        print(f"  {note}")
    if model.error is not None:
        return 4
    return 2 if model.route == OUT_OF_SCOPE else 0


def cmd_present(args) -> int:
    config = _config(args)
    g = load_graph(args.graph)
    if args.raag:
        ctx = prepare(g, config.n, LINEAR)
        rd, pres = raag_presentation(ctx.mc)
        report = verify_raag_iso(ctx.mc, rd, pres)
        print(pres.to_text(), end="")
        _emit(RaagReport(**report.to_dict()).model_dump(), args.json)
        return 0 if report.ok else 4
    ctx = prepare(g, config.n)
    if args.raw:
        pres = ctx.mc.raw_presentation()
    else:
        if not is_cactus(g):
            raise PreconditionError(f"{g.name} is not a cactus graph; use --raw")
        pres = scr_presentation(ctx.mc).presentation
    print(pres.to_text(), end="")
    if args.json:
        _emit(PresentationModel(**presentation_dict(pres)).model_dump(), args.json)
    return 0


def cmd_homology(args) -> int:
    config = _config(args)
    ctx = prepare(load_graph(args.graph), config.n)
    cc = chain_complex(ctx.subdivided, config.n, min(args.k + 1, config.n), config.cell_budget)
    betti, torsion = homology(cc, args.k)
    print(f"H_{args.k}(UD_{config.n}) = Z^{betti}" + "".join(f" + Z/{t}" for t in torsion))
    return 0


def cmd_massey(args) -> int:
    config = _config(args)
    g = load_graph(args.graph)
    if not is_cactus(g):
        raise PreconditionError(f"{g.name} is not a cactus graph")
    ctx = prepare(g, config.n)
    pres = scr_presentation(ctx.mc).presentation
    if args.search:
        cert = search_triples(pres, config.triple_budget)
        if cert is None:
            print("no nontrivial triple found")
            return 0
    else:
        if not (args.alpha and args.beta and args.gamma):
            raise ValidationError("Give --alpha, --beta and --gamma, or --search")
        size = len(pres.generators)
        classes = [validate_coefficients(x, size) for x in (args.alpha, args.beta, args.gamma)]
        cert = massey_nontrivial(pres, *classes)
    model = CertificateModel(**cert.to_dict())
    _emit(model.model_dump(), args.json)
    print(f"verdict: {model.verdict}")
    return 0


def cmd_detect(args) -> int:
    g = load_graph(args.graph)
    cactus = is_cactus(g)
    nuclei = detect_nuclei(g)
    print(f"{g.name}: cactus={cactus} nuclei={','.join(nuclei) or 'none'}")
    if cactus and not nuclei:
        for block in building_blocks(g, check=False):
            print(f"  {block.kind}: {' '.join(str(g.labels[v]) for v in block.vertices)}")
    return 0


def cmd_verify(args) -> int:
    path = Path(args.certificate)
    if not path.exists():
        raise ValidationError(f"Certificate file does not exist: {path}")
    try:
        data = CertificateModel(**json.loads(path.read_text())).model_dump()
    except (ModelError, json.JSONDecodeError) as e:
        raise ValidationError(f"Malformed certificate: {e}")
    check = verify_certificate(data)
    print(f"{'ok' if check.ok else 'MISMATCH'}: {check.verdict}")
    for problem in check.problems:
        print(f"  {problem}")
    return 0 if check.ok else 4


def cmd_corpus(args) -> int:
    indices = [int(x) for x in args.indices.split(",")]
    rows = corpus_regression(args.path, indices, args.expected)
    checks = sorted({c for r in rows for c in r.checks})
    print("graph".ljust(24) + "n  " + " ".join(c.ljust(12) for c in checks))
    for r in rows:
        cells = [("ok" if r.checks[c] else "FAIL") if c in r.checks else "-" for c in checks]
        print(r.graph.ljust(24) + f"{r.n}  " + " ".join(x.ljust(12) for x in cells))
    if args.json:
        _emit([r.to_dict() for r in rows], args.json)
    return 0 if all(r.ok for r in rows) else 4


def cmd_export(args) -> int:
    config = _config(args)
    ctx = prepare(load_graph(args.graph), config.n)
    cc = chain_complex(ctx.subdivided, config.n, args.max_dim, config.cell_budget)
    export_chain_complex(cc, args.output)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="braidlab", description="Graph braid group presentations and Massey products")
    parser.add_argument("--log-level", choices=["DEBUG", "INFO", "WARNING", "ERROR"], type=str.upper)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("analyze", help="decide the RAAG question for a graph")
    p.add_argument("graph")
    p.add_argument("-n", type=int)
    p.add_argument("--json")
    p.add_argument("--no-oracle", action="store_true", help="skip the cube-complex homology")
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("present", help="print a presentation")
    p.add_argument("graph")
    p.add_argument("-n", type=int)
    kind = p.add_mutually_exclusive_group()
    kind.add_argument("--raw", action="store_true")
    kind.add_argument("--scr", action="store_true")
    kind.add_argument("--raag", action="store_true")
    p.add_argument("--json")
    p.set_defaults(func=cmd_present)

    p = sub.add_parser("homology", help="integral homology of the configuration space")
    p.add_argument("graph")
    p.add_argument("-n", type=int)
    p.add_argument("-k", type=int, default=1)
    p.set_defaults(func=cmd_homology)

    p = sub.add_parser("massey", help="triple Massey product certificate")
    p.add_argument("graph")
    p.add_argument("-n", type=int)
    p.add_argument("--alpha")
    p.add_argument("--beta")
    p.add_argument("--gamma")
    p.add_argument("--search", action="store_true")
    p.add_argument("--json")
    p.set_defaults(func=cmd_massey)

    p = sub.add_parser("detect", help="nuclei and building blocks")
    p.add_argument("graph")
    p.set_defaults(func=cmd_detect)

    p = sub.add_parser("verify", help="re-check a stored certificate")
    p.add_argument("certificate")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("corpus", help="run the regression matrix")
    p.add_argument("--path")
    p.add_argument("--indices", default="2,3,4")
    p.add_argument("--expected", help="expected-value JSON file")
    p.add_argument("--json")
    p.set_defaults(func=cmd_corpus)

    p = sub.add_parser("export", help="write boundary matrices")
    p.add_argument("graph")
    p.add_argument("output")
    p.add_argument("-n", type=int)
    p.add_argument("--max-dim", type=int)
    p.set_defaults(func=cmd_export)
    return parser


def run(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    if args.log_level:
        logger.set_level(args.log_level)
    try:
        return args.func(args)
    except BraidLabError as e:
        logger.error(f"{type(e).__name__}: {e}")
        return e.exit_code
    except OSError as e:
        logger.error(f"I/O error: {e}")
        return 1


def main() -> None:
    sys.exit(run())
