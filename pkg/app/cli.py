"""
GridComply command-line interface

    python -m app.cli scan --device droop --params p.json --out scan.csv
    python -m app.cli fit --input scan.csv --order 10 --out model.json --report fit.json
    python -m app.cli check --model model.json --range low --out verdict.json
    python -m app.cli transform --model model.json --to III --op op.json --tau 0.01 --out m3.json
    python -m app.cli jacobian --network net.json --kqvc contrib.json --out jlf.json
    python -m app.cli comply --scan scan.csv --op op.json --tau 0.01 --kqvc 0.4 --out report.json

Exit status: 0 pass, 1 criteria not met, 2 input error.
"""
import argparse
import logging
import sys
from typing import Any, Optional, Sequence

from pydantic import ValidationError as PydanticValidationError

from app.config import DEVICE_KINDS, EXIT_CODES, get_settings
from app.core.exceptions import GridComplyException, ValidationError
from app.models.lti import FreqRange, ModelKind, Spacing
from app.models.operating_point import OperatingPoint, Side, TransformSpec
from app.schemas.documents import DeviceDocument
from app.schemas.fit import FitConfig, Weighting
from app.services.compliance_service import ComplianceService
from app.services.device_service import DeviceModelService
from app.services.jacobian_service import JacobianService
from app.services.lti_service import LTIService
from app.services.passivity_service import PassivityService
from app.services.storage_service import StorageService
from app.services.transform_service import TransformService
from app.services.vector_fit_service import VectorFitService

logger = logging.getLogger("app.cli")

DEFAULT_OPERATING_POINT = {"vD0": 0.0, "vQ0": 1.0, "iD0": 0.0, "iQ0": 0.0}


def _status(passed: bool) -> int:
    return EXIT_CODES["pass"] if passed else EXIT_CODES["fail"]


def _emit(storage: StorageService, payload: Any, out: Optional[str]) -> None:
    if out:
        storage.write_json(payload, out)
    else:
        sys.stdout.write(storage.dumps(payload).decode() + "\n")


def _operating_point(storage: StorageService, path: Optional[str]) -> OperatingPoint:
    if path is None:
        return OperatingPoint(**DEFAULT_OPERATING_POINT)
    return storage.read_operating_point(path)


def _device_document(storage: StorageService, kind: str, params_path: str, op_path: Optional[str]) -> DeviceDocument:
    """Accept a full device document or a flat parameter object"""
    data = storage.read_json(params_path)
    if not isinstance(data, dict):
        raise ValidationError(f"{params_path} must hold a JSON object")
    if "params" in data:
        document = dict(data, kind=data.get("kind", kind))
    else:
        params = {key: value for key, value in data.items() if key != "operating_point"}
        document = {"kind": kind, "params": params, "operating_point": data.get("operating_point")}
    if document["kind"] != kind:
        raise ValidationError(f"--device {kind} does not match kind '{document['kind']}' in {params_path}")
    if op_path is not None:
        document["operating_point"] = storage.read_json(op_path)
    if document.get("operating_point") is None:
        document["operating_point"] = DEFAULT_OPERATING_POINT
    return storage.parse_document(DeviceDocument, document, params_path)


# Subcommands

def cmd_scan(args: argparse.Namespace, storage: StorageService) -> int:
    device = _device_document(storage, args.device, args.params, args.op)
    grid = LTIService().make_grid(args.fmin, args.fmax, args.points, args.spacing)
    response = DeviceModelService().scan(device.kind, device.build_params(), device.operating_point, grid)
    storage.write_scan(response, args.out)
    return EXIT_CODES["pass"]


def cmd_fit(args: argparse.Namespace, storage: StorageService) -> int:
    response = storage.read_scan(args.input)
    config = FitConfig(
        order=args.order,
        auto_order=args.auto_order,
        weighting=args.weighting,
        enforce_stability=not args.no_stability,
        **({"max_iters": args.max_iters} if args.max_iters else {})
    )
    model, report = VectorFitService().vector_fit(response, config)
    storage.write_model(model, args.out)
    if args.report:
        storage.write_json(report, args.report)
    print(f"order {report.order}: max relative error {report.max_rel_error:.3e}"
          f"{'' if report.converged else ' (not converged)'}")
    return _status(report.max_rel_error <= get_settings().fit_accept_error)


def cmd_check(args: argparse.Namespace, storage: StorageService) -> int:
    model = storage.read_model(args.model)
    verdict = PassivityService().passivity_verdict(model, args.range)
    _emit(storage, verdict, args.out)
    if args.curve_csv:
        storage.write_curve_csv(verdict.min_eig_curve, args.curve_csv)
    print(f"{args.range} range: {'PASS' if verdict.overall else 'FAIL'}", file=sys.stderr)
    return _status(verdict.overall)


def cmd_transform(args: argparse.Namespace, storage: StorageService) -> int:
    model = storage.read_model(args.model)
    op = storage.read_operating_point(args.op) if args.op else None
    spec = TransformSpec(tau=args.tau, k_qv_c=args.kqvc, side=args.side)
    converted = TransformService().convert(model, args.to, op, spec)
    storage.write_model(converted, args.out)
    return EXIT_CODES["pass"]


def cmd_jacobian(args: argparse.Namespace, storage: StorageService) -> int:
    network = storage.load_wscc9() if args.network == "wscc9" else storage.read_network(args.network)
    service = JacobianService()
    report = service.build_jlf(network)
    if args.kqvc:
        report = service.apply_kqvc(report, storage.read_contributions(args.kqvc))
    _emit(storage, report, args.out)
    print(f"min non-zero eigenvalue of J_LF + J_LF^T: {report.min_nonzero_eig:.6g}"
          f" ({report.negative_count} negative)", file=sys.stderr)
    return _status(report.psd)


def cmd_comply(args: argparse.Namespace, storage: StorageService) -> int:
    if (args.scan is None) == (args.model is None):
        raise ValidationError("Give exactly one of --scan or --model")
    source = storage.read_scan(args.scan) if args.scan else storage.read_model(args.model)
    op = _operating_point(storage, args.op)
    spec = TransformSpec(tau=args.tau, k_qv_c=args.kqvc)
    cfg = FitConfig(order=args.order, auto_order=args.auto_order)
    report = ComplianceService().run_pipeline(
        source, op, spec, cfg, series_r=args.series_r, high_limit_hz=args.high_limit_hz
    )
    _emit(storage, report, args.out)
    if args.curve_csv and report.low_frequency is not None:
        storage.write_curve_csv(report.low_frequency.min_eig_curve, args.curve_csv)
    for step in report.steps:
        note = f"  [{step.error_code}] {step.message}" if step.error_code else ""
        print(f"{step.step}. {step.name:<26} {'pass' if step.passed else 'FAIL'}{note}", file=sys.stderr)
    return _status(report.overall)


# Parser

def build_parser() -> argparse.ArgumentParser:
    settings = get_settings()
    parser = argparse.ArgumentParser(prog="gridcomply", description="Passivity-based device compliance toolkit")
    parser.add_argument("--log-level", default=settings.log_level, help="Logging level (default: LOG_LEVEL)")
    sub = parser.add_subparsers(dest="command", required=True)

    scan = sub.add_parser("scan", help="Synthetic admittance scan of a device archetype")
    scan.add_argument("--device", choices=DEVICE_KINDS, required=True)
    scan.add_argument("--params", required=True, help="Device parameter JSON")
    scan.add_argument("--op", help="Operating point JSON (default vD0=0, vQ0=1, zero current)")
    scan.add_argument("--fmin", type=float, default=0.2)
    scan.add_argument("--fmax", type=float, default=200.0)
    scan.add_argument("--points", type=int, default=400)
    scan.add_argument("--spacing", choices=[Spacing.LOG.value, Spacing.LINEAR.value], default=Spacing.LOG.value)
    scan.add_argument("--out", required=True)
    scan.set_defaults(handler=cmd_scan)

    fit = sub.add_parser("fit", help="Rational fit of a scan")
    fit.add_argument("--input", required=True, help="Scan CSV")
    fit.add_argument("--order", type=int, default=10)
    fit.add_argument("--auto-order", action="store_true")
    fit.add_argument("--weighting", choices=[w.value for w in Weighting], default=Weighting.INVERSE_MAGNITUDE.value)
    fit.add_argument("--max-iters", type=int)
    fit.add_argument("--no-stability", action="store_true", help="Keep unstable relocated poles")
    fit.add_argument("--out", required=True)
    fit.add_argument("--report")
    fit.set_defaults(handler=cmd_fit)

    check = sub.add_parser("check", help="Passivity verdict of a model")
    check.add_argument("--model", required=True)
    check.add_argument("--range", choices=[r.value for r in FreqRange], default=FreqRange.FULL.value)
    check.add_argument("--out")
    check.add_argument("--curve-csv")
    check.set_defaults(handler=cmd_check)

    transform = sub.add_parser("transform", help="Convert a model between formulations")
    transform.add_argument("--model", required=True)
    transform.add_argument("--to", choices=[k.value for k in ModelKind], required=True)
    transform.add_argument("--op")
    transform.add_argument("--tau", type=float, default=settings.default_tau)
    transform.add_argument("--kqvc", type=float, default=0.0)
    transform.add_argument("--side", choices=[s.value for s in Side], default=Side.DEVICE.value)
    transform.add_argument("--out", required=True)
    transform.set_defaults(handler=cmd_transform)

    jacobian = sub.add_parser("jacobian", help="Load-flow Jacobian of a network")
    jacobian.add_argument("--network", required=True, help="Network JSON, or 'wscc9' for the shipped case")
    jacobian.add_argument("--kqvc", help="Contributions JSON: bus id -> k_qv_c")
    jacobian.add_argument("--out")
    jacobian.set_defaults(handler=cmd_jacobian)

    comply = sub.add_parser("comply", help="Run the eight-step device criteria")
    comply.add_argument("--scan")
    comply.add_argument("--model", help="Already fitted Model-I JSON instead of a scan")
    comply.add_argument("--op")
    comply.add_argument("--tau", type=float, default=settings.default_tau)
    comply.add_argument("--kqvc", type=float, default=0.0)
    comply.add_argument("--order", type=int, default=10)
    comply.add_argument("--auto-order", action="store_true")
    comply.add_argument("--series-r", type=float, default=0.0)
    comply.add_argument("--high-limit-hz", type=float)
    comply.add_argument("--out")
    comply.add_argument("--curve-csv")
    comply.set_defaults(handler=cmd_comply)

    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)

    logging.basicConfig(
        level=getattr(logging, str(args.log_level).upper(), logging.INFO),
        format="%(asctime)s - %(name)s - %(levelname)s - %(message)s"
    )

    storage = StorageService()
    try:
        return args.handler(args, storage)
    except GridComplyException as e:
        logger.debug(f"{e.error_code}: {e.details}")
        print(f"error [{e.error_code}]: {e.message}", file=sys.stderr)
        return e.exit_code
    except PydanticValidationError as e:
        print(f"error [validation_error]: {e.error_count()} invalid option(s)\n{e}", file=sys.stderr)
        return EXIT_CODES["input_error"]


if __name__ == "__main__":
    sys.exit(main())
