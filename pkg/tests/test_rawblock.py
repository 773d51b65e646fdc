import numpy as np
import pytest

from qrngkit.rawblock import MAGIC, RawCodeBlock, read_block, write_block


def _block(codes, **kwargs):
    defaults = dict(led_on=True, rng_seed=99, config_digest=b"\x01" * 8)
    defaults.update(kwargs)
    return RawCodeBlock(codes=np.asarray(codes, dtype=np.uint16), **defaults)


def test_round_trip(tmp_path):
    rng = np.random.default_rng(3)
    block = _block(rng.integers(0, 4096, 1000), led_on=False, rng_seed=2**63 + 5)
    path = tmp_path / "codes.raw"
    nbytes = write_block(block, path)
    assert nbytes == 32 + 2 * 1000
    assert read_block(path) == block


def test_header_layout(tmp_path):
    path = tmp_path / "codes.raw"
    write_block(_block([1, 2, 3]), path)
    raw = path.read_bytes()
    assert raw[:8] == MAGIC
    assert raw[8] == 12          # adc_bits
    assert raw[9] == 1           # led_on
    assert raw[10:12] == b"\x00\x00"
    assert int.from_bytes(raw[12:16], "little") == 100_000
    assert int.from_bytes(raw[16:24], "little") == 99
    assert raw[24:32] == b"\x01" * 8
    # codes are little-endian uint16 with the high nibble clear
    assert raw[32:38] == b"\x01\x00\x02\x00\x03\x00"


def test_codes_must_fit_bits():
    with pytest.raises(ValueError, match="do not fit"):
        _block([5000], adc_bits=12)
    _block([5000], adc_bits=13)  # fine with one more bit


def test_bad_magic_rejected(tmp_path):
    path = tmp_path / "codes.raw"
    write_block(_block([1]), path)
    corrupted = b"NOTMAGIC" + path.read_bytes()[8:]
    path.write_bytes(corrupted)
    with pytest.raises(ValueError, match="bad magic"):
        read_block(path)


def test_truncated_file_rejected(tmp_path):
    path = tmp_path / "codes.raw"
    path.write_bytes(b"short")
    with pytest.raises(ValueError, match="truncated"):
        read_block(path)


def test_odd_payload_rejected(tmp_path):
    path = tmp_path / "codes.raw"
    write_block(_block([1]), path)
    path.write_bytes(path.read_bytes() + b"\x07")
    with pytest.raises(ValueError, match="odd payload"):
        read_block(path)


def test_digest_must_be_8_bytes():
    with pytest.raises(ValueError, match="8 bytes"):
        _block([1], config_digest=b"\x01\x02")
