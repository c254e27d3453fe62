import logging


def configure_logging(level: str = "INFO") -> None:
    """Configure the root logger once for command-line use"""
    logging.basicConfig(
        level=getattr(logging, str(level).upper(), logging.INFO),
        format="%(levelname)s: %(message)s",
        force=True,
    )
