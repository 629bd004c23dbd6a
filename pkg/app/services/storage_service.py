"""
Storage Service - scan CSV, model and report JSON, curve CSV
"""
import logging
import os
from pathlib import Path
from typing import Any, Dict, List, Sequence, Union

import numpy as np
import orjson
import pandas as pd
from pydantic import BaseModel, ValidationError as PydanticValidationError

from app.config import CURVE_CSV_COLUMNS, SCAN_CSV_COLUMNS
from app.core.exceptions import NotFoundError, ValidationError
from app.models.lti import FreqGrid, FreqResponse, ModelKind, RationalModel, Spacing
from app.models.network import NetworkSpec
from app.models.operating_point import OperatingPoint
from app.schemas.documents import ModelDocument

logger = logging.getLogger(__name__)

PathLike = Union[str, os.PathLike]

DATA_DIR = Path(__file__).resolve().parent.parent / "data"
WSCC9_PATH = DATA_DIR / "wscc9.json"

JSON_OPTIONS = orjson.OPT_INDENT_2 | orjson.OPT_SORT_KEYS | orjson.OPT_SERIALIZE_NUMPY


class StorageService:
    """Service for reading and writing toolkit files"""

    # JSON

    def dumps(self, payload: Any) -> bytes:
        """Deterministic JSON: sorted keys, two-space indent"""
        if isinstance(payload, BaseModel):
            payload = payload.model_dump(mode="json", by_alias=True)
        return orjson.dumps(payload, option=JSON_OPTIONS)

    def write_json(self, payload: Any, path: PathLike) -> None:
        self._write_bytes(Path(path), self.dumps(payload) + b"\n")

    def read_json(self, path: PathLike) -> Any:
        path = Path(path)
        data = self._read_bytes(path)
        try:
            return orjson.loads(data)
        except orjson.JSONDecodeError as e:
            raise ValidationError(f"{path.name} is not valid JSON: {e}")

    def parse_document(self, schema: type, data: Any, source: str) -> Any:
        try:
            return schema.model_validate(data)
        except PydanticValidationError as e:
            raise ValidationError(f"Invalid {source}", details=e.errors(include_url=False))

    # Documents

    def read_model(self, path: PathLike) -> RationalModel:
        return self.parse_document(ModelDocument, self.read_json(path), Path(path).name).to_model()

    def write_model(self, model: RationalModel, path: PathLike) -> None:
        self.write_json(ModelDocument.from_model(model), path)
        logger.info(f"Wrote {model.n_states}-state Model-{model.kind.value} to {path}")

    def read_operating_point(self, path: PathLike) -> OperatingPoint:
        return self.parse_document(OperatingPoint, self.read_json(path), Path(path).name)

    def read_network(self, path: PathLike) -> NetworkSpec:
        return self.parse_document(NetworkSpec, self.read_json(path), Path(path).name)

    def read_contributions(self, path: PathLike) -> Dict[str, float]:
        data = self.read_json(path)
        if not isinstance(data, dict):
            raise ValidationError("Contributions must be a JSON object of bus id -> k_qv_c")
        try:
            return {str(key): float(value) for key, value in data.items()}
        except (TypeError, ValueError) as e:
            raise ValidationError(f"Invalid contribution value: {e}")

    def load_wscc9(self) -> NetworkSpec:
        """Shipped 9-bus, 3-machine network"""
        return self.read_network(WSCC9_PATH)

    # Scan CSV

    def scan_frame(self, response: FreqResponse) -> pd.DataFrame:
        """Scan table in the CSV column order"""
        samples = response.samples
        if samples.shape[1:] != (2, 2):
            raise ValidationError("Scan files hold 2x2 responses")
        columns: Dict[str, np.ndarray] = {"freq_hz": response.grid.f_hz}
        for i in range(2):
            for j in range(2):
                columns[f"re_y{i + 1}{j + 1}"] = samples[:, i, j].real
                columns[f"im_y{i + 1}{j + 1}"] = samples[:, i, j].imag
        return pd.DataFrame(columns, columns=SCAN_CSV_COLUMNS)

    def response_from_frame(self, frame: pd.DataFrame, kind: ModelKind = ModelKind.I) -> FreqResponse:
        """
        Validate a scan table and convert it to a response.

        Raises:
            ValidationError: missing columns, non-finite values or frequencies not ascending
        """
        missing = [c for c in SCAN_CSV_COLUMNS if c not in frame.columns]
        if missing:
            raise ValidationError("Scan is missing columns", details={"missing": missing})
        try:
            values = frame[SCAN_CSV_COLUMNS].to_numpy(dtype=float)
        except (TypeError, ValueError) as e:
            raise ValidationError(f"Scan has non-numeric entries: {e}")
        if values.shape[0] == 0:
            raise ValidationError("Scan has no rows")
        if not np.all(np.isfinite(values)):
            raise ValidationError("Scan has non-finite entries")
        f_hz = values[:, 0]
        if np.any(np.diff(f_hz) <= 0):
            raise ValidationError("Scan frequencies must be strictly ascending")

        samples = np.empty((f_hz.size, 2, 2), dtype=complex)
        for i in range(2):
            for j in range(2):
                col = 1 + 2 * (2 * i + j)
                samples[:, i, j] = values[:, col] + 1j * values[:, col + 1]
        return FreqResponse(grid=FreqGrid.from_hz(f_hz, Spacing.CUSTOM), samples=samples, kind=kind)

    def response_from_rows(self, rows: Sequence[Sequence[float]]) -> FreqResponse:
        """Scan rows in CSV column order, as carried by API requests"""
        frame = pd.DataFrame(list(rows))
        if frame.shape[1] != len(SCAN_CSV_COLUMNS):
            raise ValidationError(f"Scan rows need {len(SCAN_CSV_COLUMNS)} values each")
        frame.columns = SCAN_CSV_COLUMNS
        return self.response_from_frame(frame)

    def rows_from_response(self, response: FreqResponse) -> List[List[float]]:
        return self.scan_frame(response).to_numpy().tolist()

    def read_scan(self, path: PathLike) -> FreqResponse:
        path = Path(path)
        if not path.exists():
            raise NotFoundError("File", str(path))
        try:
            frame = pd.read_csv(path)
        except (pd.errors.ParserError, pd.errors.EmptyDataError, UnicodeDecodeError) as e:
            raise ValidationError(f"Cannot parse {path.name}: {e}")
        response = self.response_from_frame(frame)
        logger.info(f"Read scan with {len(response)} points from {path}")
        return response

    def write_scan(self, response: FreqResponse, path: PathLike) -> None:
        path = Path(path)
        self._ensure_parent(path)
        self.scan_frame(response).to_csv(path, index=False, float_format="%.17g")
        logger.info(f"Wrote scan with {len(response)} points to {path}")

    # Plot data

    def write_curve_csv(self, rows: Sequence[Sequence[float]], path: PathLike) -> None:
        """Hermitian-part eigenvalue curve, one row per frequency"""
        path = Path(path)
        self._ensure_parent(path)
        width = len(rows[0]) if rows else len(CURVE_CSV_COLUMNS)
        columns = ["freq_hz"] + [f"eig{k}" for k in range(1, width)]
        pd.DataFrame(list(rows), columns=columns).to_csv(path, index=False, float_format="%.17g")
        logger.info(f"Wrote {len(rows)} curve rows to {path}")

    # Files

    def _ensure_parent(self, path: Path) -> None:
        if path.parent and not path.parent.exists():
            os.makedirs(path.parent, exist_ok=True)

    def _write_bytes(self, path: Path, data: bytes) -> None:
        self._ensure_parent(path)
        with open(path, "wb") as f:
            f.write(data)
        logger.info(f"Wrote {path}")

    def _read_bytes(self, path: Path) -> bytes:
        if not path.exists():
            raise NotFoundError("File", str(path))
        with open(path, "rb") as f:
            return f.read()
