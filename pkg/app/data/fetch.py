"""
MNIST downloader (the only networked code path)
"""
import asyncio
import hashlib
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Mapping, Optional, Sequence, Union

import aiohttp
import structlog

from app.config import settings
from app.data.mnist import TEST_IMAGES, TEST_LABELS, TRAIN_IMAGES, TRAIN_LABELS
from app.errors import FetchError

logger = logging.getLogger(__name__)
log = structlog.get_logger(__name__)

MNIST_CHECKSUMS: Dict[str, str] = {
    TRAIN_IMAGES: "f68b3c2dcbeaaa9fbdd348bbdeb94873",
    TRAIN_LABELS: "d53e105ee54ea40749a09fcbcd1e9432",
    TEST_IMAGES: "9fb629c4189551a2d022fa330f9573f3",
    TEST_LABELS: "ec29112dd5afa0611ce80d1b7f02629c",
}

_CHUNK = 1 << 16


@dataclass
class FetchReport:
    downloaded: List[str] = field(default_factory=list)
    up_to_date: List[str] = field(default_factory=list)


def md5sum(path: Union[str, Path]) -> str:
    digest = hashlib.md5()
    with open(path, "rb") as f:
        for block in iter(lambda: f.read(_CHUNK), b""):
            digest.update(block)
    return digest.hexdigest()


async def _download(session: aiohttp.ClientSession, url: str, destination: Path):
    async with session.get(url) as response:
        if response.status != 200:
            raise FetchError(f"{url} returned HTTP {response.status}")
        with open(destination, "wb") as f:
            async for block in response.content.iter_chunked(_CHUNK):
                f.write(block)


async def _fetch_one(
    session: aiohttp.ClientSession,
    name: str,
    checksum: str,
    cache_dir: Path,
    mirrors: Sequence[str],
) -> bool:
    """Returns True when the file had to be downloaded"""
    target = cache_dir / name
    if target.exists():
        if md5sum(target) == checksum:
            log.info("fetch_file", file=name, status="up_to_date")
            return False
        logger.warning(f"Checksum mismatch for cached {name}, fetching again")
        target.unlink()

    partial = target.with_name(target.name + ".part")
    errors = []
    for mirror in mirrors:
        url = mirror.rstrip("/") + "/" + name
        try:
            await _download(session, url, partial)
            found = md5sum(partial)
            if found != checksum:
                raise FetchError(f"{url}: checksum {found}, expected {checksum}")
            partial.replace(target)
            log.info("fetch_file", file=name, status="downloaded", url=url)
            return True
        except (aiohttp.ClientError, asyncio.TimeoutError, FetchError) as e:
            logger.warning(f"Mirror failed for {name}: {e}")
            errors.append(str(e))
        finally:
            if partial.exists():
                partial.unlink()
    raise FetchError(f"could not fetch {name}: " + "; ".join(errors))


async def fetch_mnist(
    cache_dir: Union[str, Path],
    mirrors: Optional[Sequence[str]] = None,
    checksums: Optional[Mapping[str, str]] = None,
    timeout: Optional[float] = None,
) -> FetchReport:
    """Make sure the four MNIST files are present and intact in cache_dir"""
    cache_dir = Path(cache_dir)
    cache_dir.mkdir(parents=True, exist_ok=True)
    mirrors = list(mirrors or settings.mnist_mirrors)
    checksums = dict(checksums or MNIST_CHECKSUMS)
    client_timeout = aiohttp.ClientTimeout(total=timeout or settings.fetch_timeout)

    report = FetchReport()
    async with aiohttp.ClientSession(timeout=client_timeout) as session:
        for name, checksum in checksums.items():
            if await _fetch_one(session, name, checksum, cache_dir, mirrors):
                report.downloaded.append(name)
            else:
                report.up_to_date.append(name)
    return report
