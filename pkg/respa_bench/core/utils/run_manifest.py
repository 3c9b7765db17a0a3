#!/usr/bin/env python3
"""
Run Manifest - Content-Hashed Record of Every Output File

Each command records the files it writes, with their SHA-256, in a JSON
manifest. Entries carry no timestamps and are kept sorted by path, so two
identical runs produce byte-identical manifests.

write_output() is the single place output files are written:
- a missing file is created
- an existing file with identical content is left alone
- an existing file with different content is an OutputExistsError unless
  force is set

RunManifest.write_all() checks a whole batch before writing any of it, so a
command either writes all of its outputs or none.
"""

from dataclasses import dataclass, asdict
from enum import Enum
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Union
import hashlib
import json
import logging

from core.utils.errors import ConfigError, OutputExistsError

logger = logging.getLogger(__name__)

MANIFEST_NAME = "manifest.json"
MANIFEST_VERSION = 1


class ArtifactKind(Enum):
    """Kinds of files a run produces"""
    CHECKPOINT = "checkpoint"
    ADVERSARIAL = "adversarial"
    TRACE = "trace"
    REPORT = "report"
    SWEEP = "sweep"
    SURFACE = "surface"


@dataclass(frozen=True)
class ManifestEntry:
    """One output file: path relative to the manifest, hash, kind and creating command"""
    path: str
    sha256: str
    kind: ArtifactKind
    created_by: str

    def to_dict(self) -> Dict[str, str]:
        data = asdict(self)
        data['kind'] = self.kind.value
        return data

    @classmethod
    def from_dict(cls, data: Dict[str, str]) -> 'ManifestEntry':
        return cls(path=data['path'], sha256=data['sha256'],
                   kind=ArtifactKind(data['kind']), created_by=data['created_by'])


@dataclass(frozen=True)
class PendingOutput:
    """A file a command has computed but not yet written"""
    path: str
    text: str
    kind: ArtifactKind


def sha256_text(text: str) -> str:
    return hashlib.sha256(text.encode('utf-8')).hexdigest()


def sha256_file(path: Union[str, Path]) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


def check_output(path: Union[str, Path], text: str, force: bool = False) -> bool:
    """
    Decide whether writing text to path is needed and allowed

    Returns:
        True when the file is missing or differs, False when it already holds text

    Raises:
        OutputExistsError: the file exists with different content and force is False
    """
    path = Path(path)
    if not path.exists():
        return True
    if path.read_bytes() == text.encode('utf-8'):
        return False
    if not force:
        raise OutputExistsError(f"{path} exists with different content (use --force to overwrite)",
                                details={'path': str(path)})
    return True


def write_output(path: Union[str, Path], text: str, force: bool = False) -> bool:
    """
    Write a text output file without silently replacing different content

    Returns:
        True when the file was written, False when identical content was already there

    Raises:
        OutputExistsError: the file exists with different content and force is False
    """
    path = Path(path)
    data = text.encode('utf-8')
    if not check_output(path, text, force):
        logger.debug(f"Unchanged: {path}")
        return False
    if path.exists():
        logger.warning(f"Overwriting {path}")
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_bytes(data)
    logger.info(f"Wrote {path}")
    return True


class RunManifest:
    """
    Manifest of the outputs under one directory

    Recording the same path again replaces its entry.
    """

    def __init__(self, root: Union[str, Path], name: str = MANIFEST_NAME):
        self.root = Path(root)
        self.path = self.root / name
        self._entries: Dict[str, ManifestEntry] = {}

    @property
    def entries(self) -> List[ManifestEntry]:
        return [self._entries[p] for p in sorted(self._entries)]

    def __len__(self) -> int:
        return len(self._entries)

    def get(self, relative_path: str) -> Optional[ManifestEntry]:
        return self._entries.get(relative_path)

    def record(self, file_path: Union[str, Path], kind: ArtifactKind, created_by: str) -> ManifestEntry:
        """Hash a written file and add it to the manifest"""
        file_path = Path(file_path)
        relative = file_path.relative_to(self.root).as_posix()
        entry = ManifestEntry(path=relative, sha256=sha256_file(file_path), kind=kind,
                              created_by=created_by)
        self._entries[relative] = entry
        return entry

    def write(self, relative_path: str, text: str, kind: ArtifactKind, created_by: str,
              force: bool = False) -> ManifestEntry:
        """write_output() under the manifest root, then record the file"""
        target = self.root / relative_path
        write_output(target, text, force=force)
        return self.record(target, kind, created_by)

    def write_all(self, outputs: Sequence[PendingOutput], created_by: str,
                  force: bool = False) -> List[ManifestEntry]:
        """
        Write a batch of outputs, or none of them

        Every target is checked before the first write, so a refused
        overwrite leaves the tree untouched.
        """
        for output in outputs:
            check_output(self.root / output.path, output.text, force=force)
        return [self.write(o.path, o.text, o.kind, created_by, force=force) for o in outputs]

    def render(self) -> str:
        data = {
            'manifest_version': MANIFEST_VERSION,
            'total_files': len(self._entries),
            'files': [e.to_dict() for e in self.entries],
        }
        return json.dumps(data, indent=2, sort_keys=True) + '\n'

    def save(self, force: bool = True) -> Path:
        """
        Write the manifest itself

        The manifest is regenerated by every command, so it is replaced by
        default.
        """
        write_output(self.path, self.render(), force=force)
        return self.path

    @classmethod
    def load(cls, root: Union[str, Path], name: str = MANIFEST_NAME) -> 'RunManifest':
        """Read an existing manifest; a missing file gives an empty manifest"""
        manifest = cls(root, name)
        if not manifest.path.exists():
            return manifest
        try:
            data = json.loads(manifest.path.read_text(encoding='utf-8'))
            for item in data.get('files', []):
                entry = ManifestEntry.from_dict(item)
                manifest._entries[entry.path] = entry
        except (json.JSONDecodeError, KeyError, ValueError) as e:
            raise ConfigError(f"Manifest {manifest.path} is unreadable: {e}", "BAD_MANIFEST",
                              field=str(manifest.path), original_error=e) from e
        logger.debug(f"Loaded manifest {manifest.path} with {len(manifest)} entries")
        return manifest

    def verify(self) -> List[str]:
        """Relative paths whose current content no longer matches the recorded hash"""
        stale = []
        for entry in self.entries:
            target = self.root / entry.path
            if not target.exists() or sha256_file(target) != entry.sha256:
                stale.append(entry.path)
        return stale
