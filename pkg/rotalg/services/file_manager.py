import os
import csv
import json
import logging
from typing import Any, Dict, Iterable, List, Optional, Sequence

import numpy as np

from rotalg.config.settings import Config
from rotalg.models.data_models import ButterflyRow, CoeffTable, ComplexMatrix, SectionGrid
from rotalg.models.errors import InputFormatError
from rotalg.services.algebra_core import make_params
from rotalg.utils.helpers import ensure_directory_exists, format_float
from rotalg.utils.output_name import build_filename

logger = logging.getLogger(__name__)

BUTTERFLY_HEADER = ['p', 'q', 'theta', 'band_lo', 'band_hi']
COEFF_HEADER = ['m', 'n', 're', 'im']


def _to_complex(entry: Any, where: str) -> complex:
    if isinstance(entry, (list, tuple)) and len(entry) == 2:
        try:
            return complex(float(entry[0]), float(entry[1]))
        except (TypeError, ValueError) as e:
            raise InputFormatError(f'{where} 中的 [re, im] 必须是两个数值', value=entry) from e
    if isinstance(entry, (int, float)) and not isinstance(entry, bool):
        return complex(float(entry), 0.0)
    raise InputFormatError(f'{where} 中的元素应为数值或 [re, im]', value=entry)


def _to_matrix(rows: Any, where: str) -> ComplexMatrix:
    if not isinstance(rows, list) or not rows or not all(isinstance(r, list) for r in rows):
        raise InputFormatError(f'{where} 应为矩阵（行的列表）')
    width = len(rows[0])
    if any(len(r) != width for r in rows):
        raise InputFormatError(f'{where} 各行长度不一致')
    return np.array([[_to_complex(v, where) for v in r] for r in rows], dtype=complex)


class FileManager:
    """读写计算结果：JSON（截面、矩阵、结果对象）与 CSV（蝴蝶图、系数表）"""

    def __init__(self, output_dir: Optional[str] = None):
        if output_dir is None:
            output_dir = Config.get_system_config().get('output_dir')
        self.output_dir = Config.resolve_path(output_dir)

    def default_output_path(self, command: str, expr: str, extension: str) -> str:
        return os.path.join(self.output_dir, build_filename(command, expr, extension))

    # ---- 通用写入 ----
    def _open_for_write(self, path: str):
        ensure_directory_exists(os.path.dirname(os.path.abspath(path)))
        return open(path, 'w', encoding='utf-8', newline='')

    def write_json(self, path: str, payload: Dict[str, Any]) -> str:
        with self._open_for_write(path) as f:
            json.dump(payload, f, ensure_ascii=False, indent=2)
            f.write('\n')
        logger.info(f'已写入 {path}')
        return path

    def write_csv(self, path: str, header: Sequence[str], rows: Iterable[Sequence[Any]]) -> str:
        with self._open_for_write(path) as f:
            writer = csv.writer(f, lineterminator='\n')
            writer.writerow(header)
            for row in rows:
                writer.writerow([format_float(v) if isinstance(v, float) else v for v in row])
        logger.info(f'已写入 {path}')
        return path

    def read_json(self, path: str) -> Any:
        with open(path, 'r', encoding='utf-8') as f:
            try:
                return json.load(f)
            except json.JSONDecodeError as e:
                raise InputFormatError(f'JSON 解析失败: {e.msg}', path=path, line=e.lineno) from e

    # ---- 领域对象 ----
    def write_butterfly_csv(self, path: str, rows: List[ButterflyRow]) -> str:
        return self.write_csv(
            path,
            BUTTERFLY_HEADER,
            ([r.p, r.q, float(r.theta), float(r.band_lo), float(r.band_hi)] for r in rows),
        )

    def save_coeff_table(self, path: str, table: CoeffTable) -> str:
        return self.write_csv(path, COEFF_HEADER, ([m, n, float(re), float(im)] for m, n, re, im in table.rows()))

    def load_coeff_table(self, path: str) -> CoeffTable:
        coeffs: Dict[tuple, complex] = {}
        with open(path, 'r', encoding='utf-8', newline='') as f:
            reader = csv.reader(f)
            header = next(reader, None)
            if header != COEFF_HEADER:
                raise InputFormatError('系数表表头应为 m,n,re,im', path=path, header=header)
            for lineno, row in enumerate(reader, start=2):
                try:
                    m, n, re_part, im_part = row
                    coeffs[(int(m), int(n))] = complex(float(re_part), float(im_part))
                except ValueError as e:
                    raise InputFormatError('系数表行格式错误', path=path, line=lineno) from e
        m_max = max((max(abs(m), abs(n)) for m, n in coeffs), default=0)
        return CoeffTable(coeffs=coeffs, m_max=m_max)

    def save_section(self, path: str, section: SectionGrid) -> str:
        return self.write_json(path, section.to_dict())

    def load_section(self, path: str) -> SectionGrid:
        data = self.read_json(path)
        if not isinstance(data, dict):
            raise InputFormatError('截面文件顶层应为对象', path=path)
        missing = [k for k in ('p', 'q', 'n', 'values') if k not in data]
        if missing:
            raise InputFormatError(f'截面文件缺少字段: {", ".join(missing)}', path=path)
        try:
            p, q, n = int(data['p']), int(data['q']), int(data['n'])
        except (TypeError, ValueError) as e:
            raise InputFormatError('p、q、n 必须是整数', path=path) from e
        params = make_params(p, q)
        values = data['values']
        if not isinstance(values, list) or len(values) != n * n:
            raise InputFormatError('values 长度应为 n²', path=path, n=n)
        mats = [_to_matrix(v, 'values') for v in values]
        if any(m.shape != (q, q) for m in mats):
            raise InputFormatError('values 中每个矩阵必须是 q×q', path=path, q=q)
        return SectionGrid(params=params, n=n, values=np.array(mats).reshape(n, n, q, q))

    def load_matrix(self, path: str) -> ComplexMatrix:
        """矩阵文件：行的列表，或 {"matrix": 行的列表}；元素为数值或 [re, im]"""
        data = self.read_json(path)
        if isinstance(data, dict):
            if 'matrix' not in data:
                raise InputFormatError('矩阵文件缺少 matrix 字段', path=path)
            data = data['matrix']
        return _to_matrix(data, 'matrix')
