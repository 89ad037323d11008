"""On-disk formats for datasets and reports."""

from lcdr.storage.dataset_store import export_csv, load_dataset, save_dataset

__all__ = ["export_csv", "load_dataset", "save_dataset"]
