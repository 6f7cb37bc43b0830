"""iotsqlbench: IoT text-to-SQL benchmark construction and model scoring.

Subpackages: store (embedded SQL engine + schema), ingest (Zeek/sensor
parsing and synthesis), templates (text-SQL pair generation), splitter,
modelio, evaluation, baselines, cli.
"""

__version__ = "0.1.0"
