#!/usr/bin/env python3
"""
Data service for observation, moment, recovery and report files

Binary container (``.mra``, any suffix other than ``.csv``):

    header  numpy structured record HEADER_DTYPE (little endian)
            magic b"MRA1", kind b"OBS " or b"MOM ", version, L, N, sigma, flags
    OBS     N x L float64 rows, then N int64 shifts when FLAG_SHIFTS is set
    MOM     L float64 (m1), then L x L float64 (m2, row major);
            FLAG_POPULATION marks population moments (N = 0, sigma = NaN)

CSV containers carry a header row and one record per observation.
"""

import csv
import json
import os
from pathlib import Path
from typing import Any, Dict, List, Tuple, Union

import numpy as np

from ..models.results import ExperimentReport, MomentPair, ObservationSet, RecoveryResult
from ..utils.errors import DataFormatError

PathLike = Union[str, Path]

MAGIC = b"MRA1"
FORMAT_VERSION = 1
KIND_OBSERVATIONS = b"OBS "
KIND_MOMENTS = b"MOM "
FLAG_SHIFTS = 1
FLAG_POPULATION = 2
REPORT_SCHEMA = "mra-report/1"

HEADER_DTYPE = np.dtype([
    ("magic", "S4"),
    ("kind", "S4"),
    ("version", "<u4"),
    ("L", "<u8"),
    ("N", "<u8"),
    ("sigma", "<f8"),
    ("flags", "<u4"),
])


def _is_csv(path: PathLike) -> bool:
    return str(path).lower().endswith(".csv")


def _ensure_parent(path: PathLike) -> None:
    parent = Path(path).parent
    if str(parent):
        parent.mkdir(parents=True, exist_ok=True)


def _parse_cell(text: str) -> Any:
    """Inverse of str() for the scalar types written to CSV"""
    if text == "":
        return None
    if text in ("True", "False"):
        return text == "True"
    try:
        return int(text)
    except ValueError:
        pass
    try:
        return float(text)
    except ValueError:
        pass
    if text[:1] in "[{":
        try:
            return json.loads(text)
        except json.JSONDecodeError:
            pass
    return text


def _format_cell(value: Any) -> Any:
    if isinstance(value, (list, tuple, dict)):
        return json.dumps(value)
    if isinstance(value, np.generic):
        return value.item()
    return value


class DataService:
    """Service class for reading and writing toolkit files"""

    @staticmethod
    def _write_binary(path: PathLike, kind: bytes, L: int, N: int, sigma: float, flags: int,
                      payload: List[np.ndarray]) -> None:
        header = np.zeros(1, dtype=HEADER_DTYPE)
        header[0] = (MAGIC, kind, FORMAT_VERSION, L, N, sigma, flags)
        try:
            _ensure_parent(path)
            with open(path, "wb") as f:
                f.write(header.tobytes())
                for block in payload:
                    f.write(np.ascontiguousarray(block).tobytes())
        except OSError as e:
            raise DataFormatError(f"Cannot write {path}: {e}") from e

    @staticmethod
    def _read_binary(path: PathLike, expected_kind: bytes) -> Tuple[np.void, memoryview]:
        try:
            with open(path, "rb") as f:
                raw = f.read()
        except OSError as e:
            raise DataFormatError(f"Cannot read {path}: {e}") from e
        if len(raw) < HEADER_DTYPE.itemsize:
            raise DataFormatError(f"{path} is too short for a container header")
        header = np.frombuffer(raw, dtype=HEADER_DTYPE, count=1)[0]
        if header["magic"] != MAGIC:
            raise DataFormatError(f"{path} is not a toolkit container (bad magic)")
        if header["version"] != FORMAT_VERSION:
            raise DataFormatError(f"{path} has unsupported version {header['version']}")
        if header["kind"] != expected_kind:
            raise DataFormatError(
                f"{path} holds {header['kind'].decode().strip()}, expected {expected_kind.decode().strip()}"
            )
        return header, memoryview(raw)[HEADER_DTYPE.itemsize:]

    @staticmethod
    def write_observations(path: PathLike, obs: ObservationSet) -> Dict[str, Any]:
        """Write observations as a binary container or CSV depending on the suffix"""
        if _is_csv(path):
            try:
                _ensure_parent(path)
                with open(path, "w", newline="", encoding="utf-8") as f:
                    writer = csv.writer(f)
                    writer.writerow(["sigma", "shift"] + [f"y{i}" for i in range(obs.L)])
                    for j in range(obs.N):
                        shift = "" if obs.true_shifts is None else int(obs.true_shifts[j])
                        writer.writerow([repr(obs.sigma), shift] + [repr(float(v)) for v in obs.data[j]])
            except OSError as e:
                raise DataFormatError(f"Cannot write {path}: {e}") from e
        else:
            flags = FLAG_SHIFTS if obs.true_shifts is not None else 0
            payload = [obs.data.astype("<f8")]
            if obs.true_shifts is not None:
                payload.append(obs.true_shifts.astype("<i8"))
            DataService._write_binary(path, KIND_OBSERVATIONS, obs.L, obs.N, obs.sigma, flags, payload)
        return {"status": "success", "path": str(path), "L": obs.L, "N": obs.N, "sigma": obs.sigma}

    @staticmethod
    def read_observations(path: PathLike) -> ObservationSet:
        if _is_csv(path):
            return DataService._read_observations_csv(path)
        header, body = DataService._read_binary(path, KIND_OBSERVATIONS)
        L, N = int(header["L"]), int(header["N"])
        data_bytes = 8 * L * N
        has_shifts = bool(header["flags"] & FLAG_SHIFTS)
        expected = data_bytes + (8 * N if has_shifts else 0)
        if len(body) != expected:
            raise DataFormatError(f"{path}: payload has {len(body)} bytes, expected {expected}")
        data = np.frombuffer(body, dtype="<f8", count=L * N).reshape(N, L).astype(float)
        shifts = np.frombuffer(body, dtype="<i8", offset=data_bytes).astype(np.int64) if has_shifts else None
        return ObservationSet(data=data, sigma=float(header["sigma"]), true_shifts=shifts)

    @staticmethod
    def _read_observations_csv(path: PathLike) -> ObservationSet:
        try:
            with open(path, newline="", encoding="utf-8") as f:
                rows = list(csv.reader(f))
        except OSError as e:
            raise DataFormatError(f"Cannot read {path}: {e}") from e
        if len(rows) < 2 or rows[0][:2] != ["sigma", "shift"]:
            raise DataFormatError(f"{path}: expected a header 'sigma,shift,y0,...' and at least one row")
        try:
            sigma = float(rows[1][0])
            data = np.array([[float(v) for v in row[2:]] for row in rows[1:]])
            shift_cells = [row[1] for row in rows[1:]]
            shifts = None if any(cell == "" for cell in shift_cells) else np.array([int(c) for c in shift_cells])
        except (ValueError, IndexError) as e:
            raise DataFormatError(f"{path}: malformed observation row ({e})") from e
        return ObservationSet(data=data, sigma=sigma, true_shifts=shifts)

    @staticmethod
    def write_moments(path: PathLike, moments: MomentPair) -> Dict[str, Any]:
        population = moments.is_population
        N = 0 if moments.N is None else moments.N
        sigma = float("nan") if moments.sigma is None else moments.sigma
        if _is_csv(path):
            try:
                _ensure_parent(path)
                with open(path, "w", newline="", encoding="utf-8") as f:
                    writer = csv.writer(f)
                    writer.writerow(["source", "N", "sigma", "part"] + [f"c{i}" for i in range(moments.L)])
                    prefix = [moments.source, N, repr(sigma)]
                    writer.writerow(prefix + ["m1"] + [repr(float(v)) for v in moments.m1])
                    for row in moments.m2:
                        writer.writerow(prefix + ["m2"] + [repr(float(v)) for v in row])
            except OSError as e:
                raise DataFormatError(f"Cannot write {path}: {e}") from e
        else:
            flags = FLAG_POPULATION if population else 0
            payload = [moments.m1.astype("<f8"), moments.m2.astype("<f8")]
            DataService._write_binary(path, KIND_MOMENTS, moments.L, N, sigma, flags, payload)
        return {"status": "success", "path": str(path), "source": moments.source}

    @staticmethod
    def read_moments(path: PathLike) -> MomentPair:
        if _is_csv(path):
            try:
                with open(path, newline="", encoding="utf-8") as f:
                    rows = list(csv.reader(f))
                source, N, sigma = rows[1][0], int(rows[1][1]), float(rows[1][2])
                m1 = np.array([float(v) for v in rows[1][4:]])
                m2 = np.array([[float(v) for v in row[4:]] for row in rows[2:]])
            except (OSError, ValueError, IndexError) as e:
                raise DataFormatError(f"Cannot read moments from {path}: {e}") from e
        else:
            header, body = DataService._read_binary(path, KIND_MOMENTS)
            L = int(header["L"])
            if len(body) != 8 * (L + L * L):
                raise DataFormatError(f"{path}: payload size does not match L={L}")
            values = np.frombuffer(body, dtype="<f8").astype(float)
            m1, m2 = values[:L], values[L:].reshape(L, L)
            source = "population" if header["flags"] & FLAG_POPULATION else "sample"
            N, sigma = int(header["N"]), float(header["sigma"])
        if source == "population":
            return MomentPair(m1=m1, m2=m2, source="population")
        return MomentPair(m1=m1, m2=m2, source="sample", N=N, sigma=sigma)

    @staticmethod
    def truth_path(observations_path: PathLike) -> Path:
        path = Path(observations_path)
        return path.with_name(path.stem + ".truth.json")

    @staticmethod
    def write_truth(path: PathLike, x: np.ndarray, rho: np.ndarray, extra: Dict[str, Any] = None) -> None:
        record = {"x": [float(v) for v in x], "rho": [float(v) for v in rho]}
        record.update(extra or {})
        try:
            _ensure_parent(path)
            with open(path, "w", encoding="utf-8") as f:
                json.dump(record, f, indent=2)
        except OSError as e:
            raise DataFormatError(f"Cannot write {path}: {e}") from e

    @staticmethod
    def read_truth(path: PathLike) -> Tuple[np.ndarray, np.ndarray]:
        try:
            with open(path, "r", encoding="utf-8") as f:
                record = json.load(f)
            return np.asarray(record["x"], dtype=float), np.asarray(record["rho"], dtype=float)
        except (OSError, KeyError, json.JSONDecodeError) as e:
            raise DataFormatError(f"Cannot read truth file {path}: {e}") from e

    @staticmethod
    def write_recovery(path: PathLike, result: RecoveryResult) -> Dict[str, Any]:
        """CSV with columns field,index,value: x_hat and rho_hat entries, then diagnostics"""
        try:
            _ensure_parent(path)
            with open(path, "w", newline="", encoding="utf-8") as f:
                writer = csv.writer(f)
                writer.writerow(["field", "index", "value"])
                writer.writerow(["method", "", result.method])
                for i, value in enumerate(result.x_hat):
                    writer.writerow(["x_hat", i, repr(float(value))])
                for i, value in enumerate(result.rho_hat):
                    writer.writerow(["rho_hat", i, repr(float(value))])
                for key, value in result.diagnostics.items():
                    writer.writerow([key, "", _format_cell(value)])
        except OSError as e:
            raise DataFormatError(f"Cannot write {path}: {e}") from e
        return {"status": "success", "path": str(path)}

    @staticmethod
    def read_recovery(path: PathLike) -> RecoveryResult:
        try:
            with open(path, newline="", encoding="utf-8") as f:
                rows = list(csv.DictReader(f))
        except OSError as e:
            raise DataFormatError(f"Cannot read {path}: {e}") from e
        x_hat, rho_hat, diagnostics, method = [], [], {}, ""
        for row in rows:
            if row["field"] == "x_hat":
                x_hat.append(float(row["value"]))
            elif row["field"] == "rho_hat":
                rho_hat.append(float(row["value"]))
            elif row["field"] == "method":
                method = row["value"]
            else:
                diagnostics[row["field"]] = _parse_cell(row["value"])
        return RecoveryResult(x_hat=np.array(x_hat), rho_hat=np.array(rho_hat), diagnostics=diagnostics, method=method)

    @staticmethod
    def metadata_path(report_path: PathLike) -> Path:
        path = Path(report_path)
        return path.with_name(path.stem + ".meta.json")

    @staticmethod
    def write_report(path: PathLike, report: ExperimentReport) -> Dict[str, Any]:
        """Write the report CSV (schema column first) and its metadata sidecar"""
        columns: List[str] = ["schema", "kind"]
        for row in report.rows:
            for key in row:
                if key not in columns:
                    columns.append(key)
        try:
            _ensure_parent(path)
            with open(path, "w", newline="", encoding="utf-8") as f:
                writer = csv.DictWriter(f, fieldnames=columns)
                writer.writeheader()
                for row in report.rows:
                    record = {"schema": REPORT_SCHEMA, "kind": report.kind}
                    record.update({key: _format_cell(value) for key, value in row.items()})
                    writer.writerow(record)
            with open(DataService.metadata_path(path), "w", encoding="utf-8") as f:
                json.dump(report.metadata, f, indent=2, default=str)
        except OSError as e:
            raise DataFormatError(f"Cannot write report {path}: {e}") from e
        return {"status": "success", "path": str(path), "rows": len(report.rows)}

    @staticmethod
    def read_report(path: PathLike) -> ExperimentReport:
        try:
            with open(path, newline="", encoding="utf-8") as f:
                records = list(csv.DictReader(f))
            metadata: Dict[str, Any] = {}
            meta_path = DataService.metadata_path(path)
            if os.path.exists(meta_path):
                with open(meta_path, "r", encoding="utf-8") as f:
                    metadata = json.load(f)
        except (OSError, json.JSONDecodeError) as e:
            raise DataFormatError(f"Cannot read report {path}: {e}") from e
        kind = records[0]["kind"] if records else metadata.get("kind", "")
        rows = []
        for record in records:
            if record.get("schema") != REPORT_SCHEMA:
                raise DataFormatError(f"{path}: unsupported report schema {record.get('schema')!r}")
            rows.append({key: _parse_cell(value) for key, value in record.items()
                         if key not in ("schema", "kind") and value != ""})
        return ExperimentReport(kind=kind, rows=rows, metadata=metadata)
