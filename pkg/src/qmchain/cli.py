"""Command line for the measurement-chain toolkit.

Every subcommand builds a JSON request and posts it to the HTTP service,
then writes the response to plot-ready files. By default the service runs
in-process; ``--server URL`` talks to a remote instance of ``qmchain
serve`` instead. Angles on the command line are degrees throughout.

Exit codes: 0 success, 2 validation error (bad flags or a 422 from the
service), 1 internal error.
"""

from __future__ import annotations

import argparse
import asyncio
import json
import secrets
import sys
from pathlib import Path

import httpx

SWEEP_COLUMNS = (
    "xi_deg",
    "phi_deg",
    "mean_purity",
    "std_error",
    "purity_unitary_model",
    "purity_collapse_model",
)
SWEEP_CSV_HEADER = ",".join(SWEEP_COLUMNS)


class ValidationFailure(Exception):
    pass


class ServiceClient:
    """Minimal JSON-over-HTTP client; in-process unless a server is given."""

    def __init__(self, server: str | None):
        self.server = server

    def request(self, method: str, path: str, payload: dict | None = None) -> httpx.Response:
        if self.server:
            with httpx.Client(base_url=self.server, timeout=600.0) as client:
                return client.request(method, path, json=payload)

        from .service.app import app

        async def go() -> httpx.Response:
            transport = httpx.ASGITransport(app=app)
            async with httpx.AsyncClient(
                transport=transport, base_url="http://qmchain.internal", timeout=None
            ) as client:
                return await client.request(method, path, json=payload)

        return asyncio.run(go())


def _checked(resp: httpx.Response) -> dict:
    if resp.status_code == 422:
        try:
            detail = resp.json().get("detail")
        except ValueError:
            detail = resp.text
        raise ValidationFailure(f"request rejected: {detail}")
    resp.raise_for_status()
    return resp.json()


def _out_dir(args) -> Path:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _resolve_seed(args) -> int:
    if args.seed is not None:
        return args.seed
    seed = secrets.randbits(63)
    print(f"seed: {seed}", file=sys.stderr)
    return seed


def _write(path: Path, text: str) -> None:
    path.write_text(text)
    print(f"wrote {path}")


def _write_json(path: Path, doc) -> None:
    _write(path, json.dumps(doc, indent=2, sort_keys=True) + "\n")


# ---------------------------------------------------------------------------
# flag groups
# ---------------------------------------------------------------------------

def _add_config_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--phi-deg", type=float, required=True, help="mixing angle in degrees")
    p.add_argument(
        "--input",
        choices=["diagonal", "rotated"],
        default="rotated",
        help="prepare the state in the measurement basis or rotated from it",
    )
    p.add_argument("--model", choices=["unitary", "collapse"], default="unitary")
    p.add_argument("--stages", type=int, default=3, help="measurement count (orthogonal sequence)")
    p.add_argument(
        "--angles-deg",
        default=None,
        help="comma-separated stage angles, overriding the orthogonal sequence",
    )
    p.add_argument(
        "--dephase-stages",
        default="",
        help="comma-separated 1-based stages whose readout dephases (uncompensated walk-off)",
    )


def _config_payload(args) -> dict:
    dephase = {int(s) for s in args.dephase_stages.split(",") if s.strip()}
    if args.angles_deg:
        angles = [float(a) for a in args.angles_deg.split(",")]
    else:
        if args.stages < 1:
            raise ValidationFailure("--stages must be at least 1")
        first = 0.0 if args.input == "rotated" else 90.0
        angles = [first] + [45.0] * (args.stages - 1)
    return {
        "phi_deg": args.phi_deg,
        "rotated_input": args.input == "rotated",
        "model": args.model,
        "measurements": [
            {"angle_deg": a, "dephase_after": (k + 1) in dephase}
            for k, a in enumerate(angles)
        ],
    }


def _add_sweep_flags(p: argparse.ArgumentParser, default_noise_scale: float) -> None:
    p.add_argument("--xi-start", type=float, default=0.0)
    p.add_argument("--xi-end", type=float, default=22.5)
    p.add_argument("--xi-step", type=float, default=2.25)
    p.add_argument("--replicates", type=int, default=5)
    p.add_argument(
        "--tapered-replicates",
        action="store_true",
        help="use 4 replicates at the first grid point and 2 at the last (compensated sweeps)",
    )
    p.add_argument("--no-compensation-1", action="store_true", help="crystal 1 walk-off uncompensated")
    p.add_argument("--no-compensation-2", action="store_true", help="crystal 2 walk-off uncompensated")
    p.add_argument("--no-compensation-3", action="store_true", help="crystal 3 walk-off uncompensated")
    p.add_argument("--diagonal-input", action="store_true", help="prepare in the first measurement basis")
    p.add_argument(
        "--noise",
        type=float,
        default=default_noise_scale,
        help="overall noise scale multiplying the default background/shot levels; 0 disables",
    )
    p.add_argument("--noise-background", type=float, default=None, help="background as fraction of peak")
    p.add_argument("--noise-shot", type=float, default=None, help="shot-noise scale")


def _noise_payload(args) -> dict | None:
    if args.noise < 0:
        raise ValidationFailure("--noise must be nonnegative")
    background = (
        args.noise_background if args.noise_background is not None else 0.01 * args.noise
    )
    shot = args.noise_shot if args.noise_shot is not None else 0.01 * args.noise
    if background == 0 and shot == 0:
        return None
    return {"background_fraction": background, "shot_scale": shot}


def _spec_payload(args) -> dict:
    return {
        "xi_start": args.xi_start,
        "xi_end": args.xi_end,
        "xi_step": args.xi_step,
        "replicates": args.replicates,
        "noise": _noise_payload(args),
        "compensation": [
            not args.no_compensation_1,
            not args.no_compensation_2,
            not args.no_compensation_3,
        ],
        "tapered_replicates": args.tapered_replicates,
        "rotated_input": not args.diagonal_input,
    }


def _rows_to_csv(rows: list[dict]) -> str:
    lines = [SWEEP_CSV_HEADER]
    for r in rows:
        lines.append(",".join(repr(float(r[c])) for c in SWEEP_COLUMNS))
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------

def cmd_matrix(args) -> int:
    client = ServiceClient(args.server)
    data = _checked(client.request("POST", "/api/matrix", {"config": _config_payload(args)}))
    out = _out_dir(args)
    _write_json(out / "joint_readouts.json", data["joint_readouts"])
    _write_json(out / "joint_with_q.json", data["joint_with_q"])
    if args.format == "csv":
        from .linalg import matrix_from_json_dict, matrix_to_csv

        for name in ("joint_readouts", "joint_with_q"):
            m, dims = matrix_from_json_dict(data[name])
            _write(out / f"{name}.csv", matrix_to_csv(m, dims))
    magnitude_lines = ["# |element| table, outcome bit order (stage 1 bit first)"]
    for row in data["magnitudes"]:
        magnitude_lines.append(",".join(repr(float(v)) for v in row))
    _write(out / "magnitudes.csv", "\n".join(magnitude_lines) + "\n")
    print(f"record purity: {data['purity']!r}")
    return 0


def cmd_sweep(args) -> int:
    client = ServiceClient(args.server)
    payload = {"spec": _spec_payload(args), "seed": _resolve_seed(args)}
    data = _checked(client.request("POST", "/api/sweep", payload))
    out = _out_dir(args)
    _write(out / "sweep.csv", _rows_to_csv(data["rows"]))
    if args.format == "json":
        _write_json(out / "sweep.json", data)
    return 0


def cmd_venn(args) -> int:
    client = ServiceClient(args.server)
    data = _checked(client.request("POST", "/api/venn", {"config": _config_payload(args)}))
    out = _out_dir(args)
    _write_json(out / "venn.json", data)
    for stage in data["stages"]:
        u = stage["unitary"]["conditional"]
        c = stage["collapse"]["conditional"]
        print(
            f"stage {stage['stage']}: S(Q|record) unitary {u:+.6f} bits, "
            f"collapse {c:+.6f} bits"
        )
    return 0


def cmd_reconstruct(args) -> int:
    client = ServiceClient(args.server)
    plan = None
    if args.axis_plan:
        plan = json.loads(Path(args.axis_plan).read_text())
    payload = {
        "spec": _spec_payload(args),
        "axis_plan": plan,
        "seed": _resolve_seed(args),
        "include_matrices": not args.no_matrices,
    }
    data = _checked(client.request("POST", "/api/reconstruct", payload))
    out = _out_dir(args)
    _write_json(out / "reconstruction.json", data)
    _write(out / "purity_curve.csv", _rows_to_csv(data["points"]))
    worst = max(
        (max(max(row) for row in p["element_errors"]) for p in data["points"] if p.get("element_errors")),
        default=None,
    )
    if worst is not None:
        print(f"largest element error vs truth: {worst:.3e}")
    return 0


def cmd_serve(args) -> int:
    import uvicorn

    from .service.app import app

    uvicorn.run(app, host=args.host, port=args.port)
    return 0


# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="qmchain",
        description="Consecutive-measurement chains: matrices, sweeps, entropy reports, tomography emulation.",
    )
    parser.add_argument("--seed", type=int, default=None, help="master seed; omitted = random, logged to stderr")
    parser.add_argument("--out", default=".", help="output directory")
    parser.add_argument("--format", choices=["json", "csv"], default="json")
    parser.add_argument("--server", default=None, help="remote service URL; default runs in-process")
    sub = parser.add_subparsers(dest="command")

    p = sub.add_parser("matrix", help="joint density matrix of a measurement chain")
    _add_config_flags(p)
    p.set_defaults(handler=cmd_matrix)

    p = sub.add_parser("sweep", help="purity versus waveplate angle")
    _add_sweep_flags(p, default_noise_scale=0.0)
    p.set_defaults(handler=cmd_sweep)

    p = sub.add_parser("venn", help="entropy reports per measurement stage, both models")
    _add_config_flags(p)
    p.set_defaults(handler=cmd_venn)

    p = sub.add_parser("reconstruct", help="emulated tomography over the sweep grid")
    _add_sweep_flags(p, default_noise_scale=1.0)
    p.add_argument("--axis-plan", default=None, help="JSON file overriding the default acquisition plan")
    p.add_argument("--no-matrices", action="store_true", help="omit per-point matrices from the report")
    p.set_defaults(handler=cmd_reconstruct)

    p = sub.add_parser("serve", help="run the HTTP service")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8000)
    p.set_defaults(handler=cmd_serve)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "handler", None) is None:
        parser.print_help()
        return 2
    try:
        return args.handler(args)
    except ValidationFailure as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (ValueError, OSError, httpx.HTTPError) as exc:
        print(f"internal error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
