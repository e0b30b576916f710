import io
import json
import os
import sys
from typing import Dict, Optional

import pandas as pd
import yaml
from dotenv import dotenv_values
from pydantic import BaseModel

from config import CSV_FLOAT_FORMAT, JSON_SCHEMA_VERSION, SPECTRUM_COLUMNS
from models import CriticalResult, FockCheckResult, LevelIndex, SpectrumTable, SweepTable
from utils.errors import InvalidRequest


def level_column(prefix: str, level: LevelIndex) -> str:
    return f"{prefix}_{level.n1}_{level.n2}_{level.sigma_z:+d}"


class FileSystemUtil:
    """
    FileSystemUtil reads run configuration files and renders result tables as CSV or JSON text.
    """
    base_path: str = ""

    def __init__(self, base_path: Optional[str] = None):
        """
        Initializes the FileSystemUtil with a base path.
        :param base_path: The directory relative paths are resolved against.
        """
        if base_path:
            self.base_path = base_path

    def _resolve(self, path: str) -> str:
        return os.path.join(self.base_path, path) if self.base_path else path

    def read_config_file(self, path: str) -> Dict[str, str]:
        """
        Reads a run configuration file. ``.yml``/``.yaml`` files hold a mapping; anything else is read as
        ``key = value`` lines with ``#`` comments.
        :param path: The path to the configuration file.
        :return: Dictionary of option name to raw value, names normalized to underscores.
        """
        file_path = self._resolve(path)
        if not os.path.isfile(file_path):
            raise InvalidRequest(f"Config file '{path}' does not exist.")
        if file_path.endswith((".yml", ".yaml")):
            data = self.read_yaml_file(file_path) or {}
            if not isinstance(data, dict):
                raise InvalidRequest(f"Config file '{path}' must contain a mapping.")
        else:
            data = dotenv_values(file_path)
        return {str(key).strip().replace("-", "_"): str(value).strip() for key, value in data.items()
                if value is not None}

    @staticmethod
    def read_yaml_file(file_path):
        """
        Reads a YAML file and returns the data as a dictionary.
        :param file_path: The path to the YAML file.
        :return: Dictionary containing the YAML file data.
        """
        with open(file_path, 'r') as file:
            data = yaml.safe_load(file)
        return data

    @staticmethod
    def ensure_file_and_dump_text(file_path, text):
        """
        Ensures that the directory for the file exists, then writes the text to it.
        :param file_path: The file path to write into.
        :param text: The text to dump.
        """
        directory = os.path.dirname(file_path)
        if directory:
            os.makedirs(directory, exist_ok=True)
        with open(file_path, "w", newline="") as f:
            f.write(text)

    def emit(self, text: str, out: Optional[str] = None):
        """
        Writes rendered output to ``out`` or, when no path is given, to standard output.
        """
        if out:
            self.ensure_file_and_dump_text(self._resolve(out), text)
        else:
            sys.stdout.write(text)
            sys.stdout.flush()


# Tables

def spectrum_frame(table: SpectrumTable) -> pd.DataFrame:
    rows = [{
        "model": table.model.value,
        "n1": line.level.n1,
        "n2": line.level.n2,
        "sigma_z": line.level.sigma_z,
        "E_squared": line.E_squared,
        "E": line.E,
        "E_nonrel": line.E_nonrel,
        "E_bar": line.E_bar,
    } for line in table.lines]
    return pd.DataFrame(rows, columns=SPECTRUM_COLUMNS)


def sweep_frame(table: SweepTable) -> pd.DataFrame:
    columns = ["param_value", "well_posed"] + [level_column("E_squared", level) for level in table.spec.levels]
    columns.append("splitting")
    rows = [[row.param_value, row.well_posed, *row.E_squared, row.splitting] for row in table.rows]
    frame = pd.DataFrame(rows, columns=columns)
    for column in columns[2:]:
        frame[column] = frame[column].astype(float)
    return frame


def critical_frame(result: CriticalResult) -> pd.DataFrame:
    return pd.DataFrame([{
        "model": result.model,
        "parameter": result.parameter,
        "closed_form": result.closed_form,
        "bisection": result.bisection,
        "difference": result.difference,
    }], columns=["model", "parameter", "closed_form", "bisection", "difference"]).astype(
        {"closed_form": float, "difference": float})


def fock_check_frame(result: FockCheckResult) -> pd.DataFrame:
    return pd.DataFrame([{"check": check.name, "residual": check.residual, "passed": check.passed}
                         for check in result.checks], columns=["check", "residual", "passed"])


def frame_to_csv(frame: pd.DataFrame) -> str:
    """
    Comma separated, header row, LF terminators, floats as %.16e, blanks for missing values, booleans as
    true/false.
    """
    frame = frame.copy()
    for column in frame.columns:
        if frame[column].dtype == bool:
            frame[column] = frame[column].map({True: "true", False: "false"})
    return frame.to_csv(index=False, float_format=CSV_FLOAT_FORMAT, lineterminator="\n", na_rep="")


def parse_csv(text: str) -> pd.DataFrame:
    return pd.read_csv(io.StringIO(text), float_precision="round_trip", true_values=["true"], false_values=["false"])


def reemit_csv(text: str) -> str:
    """Parses emitted CSV and renders it again; identical input and output for anything frame_to_csv produced."""
    return frame_to_csv(parse_csv(text))


def to_json(result: BaseModel) -> str:
    """
    Renders one result object as JSON carrying ``schema_version``. Non-finite floats become null.
    """
    payload = {"schema_version": JSON_SCHEMA_VERSION}
    payload.update(json.loads(result.model_dump_json()))
    return json.dumps(payload, indent=2) + "\n"
