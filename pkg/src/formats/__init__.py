"""On-disk formats: VTEN tensors, .flo flows, PPM frames, checkpoints and reports."""

from .vten import decode_vten, encode_vten, read_vten, write_vten
from .flo import decode_flo, encode_flo, flo_filename, read_flo, write_flo
from .ppm import read_frame_dir, read_ppm, write_frame_dir, write_ppm
from .checkpoint import load_checkpoint, save_checkpoint
from .reports import (
    LeakageReportDocument,
    report_schema,
    report_to_document,
    write_loss_csv,
    write_report_json,
    write_runs_csv,
)

__all__ = [
    "decode_vten",
    "encode_vten",
    "read_vten",
    "write_vten",
    "decode_flo",
    "encode_flo",
    "flo_filename",
    "read_flo",
    "write_flo",
    "read_frame_dir",
    "read_ppm",
    "write_frame_dir",
    "write_ppm",
    "load_checkpoint",
    "save_checkpoint",
    "LeakageReportDocument",
    "report_schema",
    "report_to_document",
    "write_loss_csv",
    "write_report_json",
    "write_runs_csv",
]
