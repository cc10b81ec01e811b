"""
Result Store

Handles persistence of result documents.
"""

import json
import re
from pathlib import Path
from typing import List, Optional

from models.result import ResultDocument


class ResultStore:
    """Stores and retrieves result documents in append-only fashion."""

    def __init__(self, results_dir: str = "results"):
        """
        Initialize result store.

        Args:
            results_dir: Directory for document files
        """
        self.results_dir = Path(results_dir)
        self.results_dir.mkdir(parents=True, exist_ok=True)

    def save_document(self, document: ResultDocument) -> Path:
        """
        Save document to storage (append-only, no overwrites).

        Args:
            document: ResultDocument instance

        Returns:
            Path of the written file

        Raises:
            FileExistsError: If a document with the same id already exists
        """
        path = self.results_dir / f"{document.document_id}.json"

        # Enforce append-only: raise error if file exists
        if path.exists():
            raise FileExistsError(
                f"Document {document.document_id} already exists. "
                "No overwrites allowed (append-only store)."
            )

        with open(path, 'w') as f:
            json.dump(document.to_dict(), f, indent=2)
        return path

    def load_document(self, document_id: str) -> ResultDocument:
        """
        Load document from storage.

        Args:
            document_id: Document ID to load

        Returns:
            ResultDocument instance

        Raises:
            FileNotFoundError: If the document does not exist
        """
        path = self.results_dir / f"{document_id}.json"

        if not path.exists():
            raise FileNotFoundError(
                f"Document {document_id} not found in {self.results_dir}"
            )

        with open(path, 'r') as f:
            return ResultDocument.from_dict(json.load(f))

    def list_versions(self, base_name: str) -> List[str]:
        """
        List all document IDs matching a base name prefix.

        Args:
            base_name: Prefix to match (e.g., "witness_20260101_demo")

        Returns:
            Sorted list of document IDs
        """
        return sorted(path.stem for path in self.results_dir.glob(f"{base_name}*.json"))

    def next_version(self, base_name: str) -> int:
        """Version number following the highest stored "<base_name>_v<k>"."""
        versions = [0]
        for document_id in self.list_versions(base_name):
            match = re.fullmatch(re.escape(base_name) + r'_v(\d+)', document_id)
            if match:
                versions.append(int(match.group(1)))
        return max(versions) + 1

    def lineage(self, document_id: str) -> List[ResultDocument]:
        """The document followed by its derived_from ancestors, depth first."""
        chain: List[ResultDocument] = []
        pending: List[str] = [document_id]
        seen = set()
        while pending:
            current = pending.pop(0)
            if current in seen:
                continue
            seen.add(current)
            document = self.load_document(current)
            chain.append(document)
            pending = list(document.derived_from) + pending
        return chain

    def find(self, kind: str, run_id: str) -> Optional[ResultDocument]:
        """Latest stored document of a kind for a run, if any."""
        ids = [i for i in self.list_versions(f"{kind}_") if re.search(rf'_{re.escape(run_id)}_v\d+$', i)]
        return self.load_document(ids[-1]) if ids else None
