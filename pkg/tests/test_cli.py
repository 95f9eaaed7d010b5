import os
import struct

import numpy as np
import pytest

from unscodec import cli, signals
from unscodec.config import CodecConfig, load_config, save_config
from unscodec.resample import resample_to_core
from unscodec.wavio import WavFormatError, read_wav, write_wav


def write_pcm16(path, samples, rate):
    body = (np.clip(samples, -1, 1) * 32767.0).astype("<i2").tobytes()
    fmt = struct.pack("<HHIIHH", 1, 1, rate, rate * 2, 2, 16)
    chunks = b"WAVE" + b"fmt " + struct.pack("<I", len(fmt)) + fmt
    chunks += b"data" + struct.pack("<I", len(body)) + body
    with open(path, "wb") as f:
        f.write(b"RIFF" + struct.pack("<I", len(chunks)) + chunks)


def test_wav_float_roundtrip_bit_identical(tmp_path):
    path = str(tmp_path / "x.wav")
    x = np.random.default_rng(0).standard_normal(5000).astype(np.float32)
    write_wav(path, x, 12800)
    out, rate = read_wav(path)
    assert rate == 12800
    assert np.array_equal(out.astype(np.float32), x)


def test_wav_pcm16_normalization(tmp_path):
    path = str(tmp_path / "p.wav")
    body = np.array([-32768, 0, 32767], dtype="<i2").tobytes()
    fmt = struct.pack("<HHIIHH", 1, 1, 8000, 16000, 2, 16)
    chunks = b"WAVE" + b"fmt " + struct.pack("<I", len(fmt)) + fmt
    chunks += b"data" + struct.pack("<I", len(body)) + body
    with open(path, "wb") as f:
        f.write(b"RIFF" + struct.pack("<I", len(chunks)) + chunks)
    out, rate = read_wav(path)
    assert out[0] == -1.0
    assert out[1] == 0.0
    assert abs(out[2] - 32767.0 / 32768.0) < 1e-12


def test_wav_stereo_downmix(tmp_path):
    path = str(tmp_path / "s.wav")
    inter = np.empty(200, dtype=np.float32)
    inter[0::2] = 0.5
    inter[1::2] = -0.25
    fmt = struct.pack("<HHIIHH", 3, 2, 12800, 12800 * 8, 8, 32)
    body = inter.tobytes()
    chunks = b"WAVE" + b"fmt " + struct.pack("<I", len(fmt)) + fmt
    chunks += b"data" + struct.pack("<I", len(body)) + body
    with open(path, "wb") as f:
        f.write(b"RIFF" + struct.pack("<I", len(chunks)) + chunks)
    out, _ = read_wav(path)
    assert np.allclose(out, 0.125)


def test_wav_truncated_header_names_missing_chunk(tmp_path):
    path = str(tmp_path / "t.wav")
    with open(path, "wb") as f:
        f.write(b"RIFF" + struct.pack("<I", 4) + b"WAVE")
    with pytest.raises(WavFormatError, match="fmt"):
        read_wav(path)


def test_wav_rejects_unsupported_codec(tmp_path):
    path = str(tmp_path / "u.wav")
    fmt = struct.pack("<HHIIHH", 7, 1, 8000, 8000, 1, 8)  # mu-law tag
    chunks = b"WAVE" + b"fmt " + struct.pack("<I", len(fmt)) + fmt
    chunks += b"data" + struct.pack("<I", 0)
    with open(path, "wb") as f:
        f.write(b"RIFF" + struct.pack("<I", len(chunks)) + chunks)
    with pytest.raises(WavFormatError, match="tag"):
        read_wav(path)


def test_resample_passthrough():
    x = np.sin(np.arange(1000) * 0.1)
    y = resample_to_core(x, 12800)
    assert np.array_equal(x, y)


def test_resample_dc_gain():
    y = resample_to_core(np.ones(48000), 48000)
    assert np.max(np.abs(y[200:-200] - 1.0)) < 1e-4


def test_resample_sinusoid_snr():
    t = np.arange(48000) / 48000.0
    x = np.sin(2 * np.pi * 1000.0 * t)
    y = resample_to_core(x, 48000)
    ty = np.arange(y.size) / 12800.0
    ideal = np.sin(2 * np.pi * 1000.0 * ty)
    seg = slice(500, y.size - 500)
    snr = 10 * np.log10(np.sum(ideal[seg] ** 2) / np.sum((y[seg] - ideal[seg]) ** 2))
    assert snr > 60.0


def test_resample_rejects_unsupported_rate():
    with pytest.raises(ValueError):
        resample_to_core(np.zeros(100), 4000)


@pytest.mark.parametrize("rate", [8000, 16000, 32000, 44100])
def test_resample_common_rates(rate):
    t = np.arange(rate) / rate
    x = np.sin(2 * np.pi * 997.0 * t)
    y = resample_to_core(x, rate)
    assert abs(y.size - 12800) <= 1
    ty = np.arange(y.size) / 12800.0
    ideal = np.sin(2 * np.pi * 997.0 * ty)
    seg = slice(500, y.size - 500)
    snr = 10 * np.log10(np.sum(ideal[seg] ** 2) / np.sum((y[seg] - ideal[seg]) ** 2))
    assert snr > 60.0


def test_config_rejects_unknown_key(tmp_path):
    from unscodec.config import ConfigError
    path = str(tmp_path / "bad.cfg")
    with open(path, "w") as f:
        f.write("no_such_parameter = 5\n")
    with pytest.raises(ConfigError):
        load_config(path)


def test_config_rejects_malformed_line(tmp_path):
    from unscodec.config import ConfigError
    path = str(tmp_path / "bad2.cfg")
    with open(path, "w") as f:
        f.write("just some words\n")
    with pytest.raises(ConfigError):
        load_config(path)


def test_config_file_roundtrip(tmp_path):
    path = str(tmp_path / "c.cfg")
    cfg = CodecConfig(mode="16k")
    save_config(cfg, path)
    out = load_config(path)
    assert out.band_edges == cfg.band_edges
    assert out.bits_12k == cfg.bits_12k
    assert out.bits_16k == cfg.bits_16k
    assert out.lpc_order == cfg.lpc_order
    assert abs(out.lsf_step - cfg.lsf_step) < 1e-15
    assert np.allclose(out.ecupq.thresholds, cfg.ecupq.thresholds)
    assert np.allclose(out.ecupq.levels, cfg.ecupq.levels)
    assert out.ecupq.version == cfg.ecupq.version


def test_cli_encode_decode_analyze(tmp_path):
    wav_in = str(tmp_path / "in.wav")
    stream = str(tmp_path / "a.uns")
    wav_out = str(tmp_path / "out.wav")
    pcm = signals.harmonic_tone(220.0, 1.0)
    write_wav(wav_in, pcm, 12800)

    assert cli.main(["encode", wav_in, stream, "--mode", "12k"]) == 0
    assert os.path.exists(stream)
    assert cli.main(["decode", stream, wav_out]) == 0
    out, rate = read_wav(wav_out)
    assert rate == 12800
    assert out.size == pcm.size
    assert cli.main(["analyze", wav_in, wav_out,
                     "--report-dir", str(tmp_path)]) == 0
    assert os.path.exists(tmp_path / "segsnr.csv")


def test_cli_analyze_identical_files_hits_clamp(tmp_path, capsys):
    wav = str(tmp_path / "ref.wav")
    write_wav(wav, signals.harmonic_tone(220.0, 0.5), 12800)
    assert cli.main(["analyze", wav, wav]) == 0
    out = capsys.readouterr().out
    assert "segSNR mean: 35.00 dB" in out


def test_cli_encode_resamples_other_rates(tmp_path):
    wav_in = str(tmp_path / "in48.wav")
    stream = str(tmp_path / "b.uns")
    t = np.arange(48000) / 48000.0
    write_pcm16(wav_in, 0.5 * np.sin(2 * np.pi * 440 * t), 48000)
    assert cli.main(["encode", wav_in, stream, "--mode", "16k"]) == 0
    with open(stream, "rb") as f:
        from unscodec.entropy_bitstream import StreamHeader
        header = StreamHeader.unpack(f.read())
    assert header.sample_rate_hz == 12800
    assert header.original_length == 12800


def test_cli_16k_stream_larger_than_12k(tmp_path):
    wav_in = str(tmp_path / "in.wav")
    pcm = signals.speechish(1.5)
    write_wav(wav_in, pcm, 12800)
    s12 = str(tmp_path / "s12.uns")
    s16 = str(tmp_path / "s16.uns")
    assert cli.main(["encode", wav_in, s12, "--mode", "12k"]) == 0
    assert cli.main(["encode", wav_in, s16, "--mode", "16k"]) == 0
    assert os.path.getsize(s16) > os.path.getsize(s12)


def test_cli_determinism(tmp_path):
    wav_in = str(tmp_path / "in.wav")
    pcm = signals.speechish(1.0)
    write_wav(wav_in, pcm, 12800)
    a = str(tmp_path / "a.uns")
    b = str(tmp_path / "b.uns")
    assert cli.main(["encode", wav_in, a, "--mode", "12k"]) == 0
    assert cli.main(["encode", wav_in, b, "--mode", "12k"]) == 0
    with open(a, "rb") as f:
        da = f.read()
    with open(b, "rb") as f:
        db = f.read()
    assert da == db


def test_cli_debug_bypass_writes_reconstruction(tmp_path):
    wav_in = str(tmp_path / "in.wav")
    wav_out = str(tmp_path / "bypass.wav")
    pcm = signals.harmonic_tone(220.0, 1.0)
    write_wav(wav_in, pcm, 12800)
    assert cli.main(["encode", wav_in, wav_out, "--mode", "12k",
                     "--debug-bypass"]) == 0
    out, _ = read_wav(wav_out)
    seg = slice(1024, -1024)
    err = out[seg] - pcm[seg]
    assert np.sqrt(np.mean(err ** 2)) < 1e-6  # float32 file rounding


def test_cli_tns_compare_synthetic(tmp_path):
    report_dir = str(tmp_path / "rep")
    assert cli.main(["tns-compare", "--report-dir", report_dir]) == 0
    assert os.path.exists(os.path.join(report_dir, "tns_compare.csv"))


def test_cli_design_ecupq(tmp_path):
    out = str(tmp_path / "table.cfg")
    assert cli.main(["design-ecupq", out]) == 0
    cfg = load_config(out)
    assert abs(cfg.ecupq.thresholds[-1] - 5.056) < 1e-12


def test_cli_usage_error_exit_code():
    with pytest.raises(SystemExit) as exc:
        cli.main(["encode", "only_one_arg"])
    assert exc.value.code == 1


def test_cli_processing_error_exit_code(tmp_path):
    missing = str(tmp_path / "missing.wav")
    assert cli.main(["encode", missing, str(tmp_path / "o.uns"),
                     "--mode", "12k"]) == 2


def test_cli_decode_rejects_garbage(tmp_path):
    bad = str(tmp_path / "bad.uns")
    with open(bad, "wb") as f:
        f.write(b"not a stream at all")
    assert cli.main(["decode", bad, str(tmp_path / "o.wav")]) == 2
