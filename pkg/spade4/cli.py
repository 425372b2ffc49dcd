"""
Línea de comandos ``spade4``.

Subcomandos: simulate, forecast, evaluate, interval, stability, embed-sweep
y serve. Todos aceptan ``--config``, ``--out`` y ``--seed``. Código de salida
0 si todo anduvo, 1 ante un error del toolkit (con diagnóstico en stderr) y
2 ante argumentos inválidos.
"""

import argparse
import sys
from typing import List, Optional, Sequence

from loguru import logger

from spade4.config.config import settings
from spade4.config.experiment import load_experiment_config
from spade4.config.logging_config import log_error, setup_logging
from spade4.controller import experiments
from spade4.exceptions import Spade4Error


def _int_list(text: str) -> List[int]:
    try:
        return [int(item) for item in text.split(",") if item.strip()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got '{text}'") from exc


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="archivo de experimento 'clave = valor'")
    common.add_argument("--out", help="directorio de salida (pisa output_dir)")
    common.add_argument("--seed", type=int, help="semilla maestra (pisa seed)")
    common.add_argument("--log-level", default=None, help="nivel de log de la consola")

    parser = argparse.ArgumentParser(
        prog="spade4",
        description="Pronóstico epidémico con embedding por retardos y random features dispersos",
    )
    parser.add_argument("--version", action="version", version=f"spade4 {settings.app_version}")
    sub = parser.add_subparsers(dest="command", required=True)

    sub.add_parser("simulate", parents=[common], help="serie sintética SμEIR")
    sub.add_parser("forecast", parents=[common], help="pronósticos por método y m")
    sub.add_parser("evaluate", parents=[common], help="tabla de errores relativos")
    sub.add_parser("interval", parents=[common], help="intervalo de predicción de 95%%")

    stability = sub.add_parser("stability", parents=[common], help="banda sobre semillas")
    stability.add_argument("--runs", type=int, default=None, help="cantidad de bases aleatorias")

    sweep = sub.add_parser("embed-sweep", parents=[common], help="error por dimensión p")
    sweep.add_argument("--p-values", type=_int_list, default=None, help="p separados por comas")

    serve = sub.add_parser("serve", parents=[common], help="levantar la API HTTP")
    serve.add_argument("--host", default="127.0.0.1")
    serve.add_argument("--port", type=int, default=8000)
    return parser


def _run(args: argparse.Namespace) -> None:
    if args.command == "serve":
        import uvicorn

        uvicorn.run("spade4.main:app", host=args.host, port=args.port)
        return

    config = load_experiment_config(
        args.config, overrides={"output_dir": args.out, "seed": args.seed}
    )
    if args.command == "simulate":
        outputs = experiments.cmd_simulate(config)
    elif args.command == "forecast":
        outputs = experiments.cmd_forecast(config)
    elif args.command == "evaluate":
        outputs = experiments.cmd_evaluate(config)
    elif args.command == "interval":
        outputs = experiments.cmd_interval(config)
    elif args.command == "stability":
        outputs = experiments.cmd_stability(config, args.runs)
    else:
        outputs = experiments.cmd_embedding_sweep(config, args.p_values)
    for path in outputs:
        print(path)


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    setup_logging(args.log_level)
    try:
        _run(args)
    except Spade4Error as exc:
        log_error(exc, {"command": args.command})
        print(f"spade4 {args.command}: error: {exc}", file=sys.stderr)
        return 1
    logger.debug(f"Command {args.command} finished")
    return 0


if __name__ == "__main__":
    sys.exit(main())
