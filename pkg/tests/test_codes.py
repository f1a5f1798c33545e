import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from polarflip import (assemble_input_vector, construct_info_set, crc16_check,
                       crc16_compute, make_code_spec, polar_encode)
from polarflip.codes import (CodeSpec, FrozenSetFileError, crc16_bits,
                             read_frozen_set_file, write_frozen_set_file)
from polarflip.flip_decoder import extract_payload


def crc16_oracle(bits):
    """Bitwise long division of the message polynomial, written first."""
    poly = [1, 1, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 1, 0, 1]
    buf = list(int(b) for b in bits)
    for i in range(len(buf) - 16):
        if buf[i]:
            for j, p in enumerate(poly):
                buf[i + j] ^= p
    if len(buf) < 16:
        buf = [0] * (16 - len(buf)) + buf
    return int("".join(map(str, buf[-16:])), 2) if buf else 0


def kron_encode_oracle(u):
    """Explicit G^(kron n) matrix multiply over GF(2)."""
    G = np.array([[1, 0], [1, 1]], dtype=np.uint8)
    mat = np.array([[1]], dtype=np.uint8)
    while mat.shape[0] < len(u):
        mat = np.kron(mat, G)
    return np.asarray(u, dtype=np.uint8) @ mat % 2


class TestConstruction:
    def test_fig_tree_info_set(self):
        # The classic P(8,4) tree: leaves 3, 5, 6, 7 carry information.
        for db in (0.0, 1.0, 2.0, 3.0, 4.0):
            info = construct_info_set(8, 4, db, "gaussian-approx")
            assert info.tolist() == [3, 5, 6, 7]

    def test_single_good_channel(self):
        assert construct_info_set(2, 1, 1.0).tolist() == [1]

    def test_bhattacharyya_hand_recursion(self):
        # z- = 2z - z^2, z+ = z^2 from z0 = 0.5 gives
        # [0.9375, 0.5625, 0.4375, 0.0625]; the two best are 2 and 3.
        z0 = 0.5
        zm = lambda z: 2 * z - z * z
        zp = lambda z: z * z
        by_hand = [zm(zm(z0)), zp(zm(z0)), zm(zp(z0)), zp(zp(z0))]
        assert by_hand == [0.9375, 0.5625, 0.4375, 0.0625]
        info = construct_info_set(4, 2, method="bhattacharyya", erasure_prob=0.5)
        assert info.tolist() == [2, 3]

    def test_monotone_nesting(self):
        prev = set()
        for K in range(1, 33):
            cur = set(construct_info_set(32, K, 1.5).tolist())
            assert prev <= cur
            prev = cur

    def test_deterministic(self):
        a = construct_info_set(256, 80, 1.25)
        b = construct_info_set(256, 80, 1.25)
        assert np.array_equal(a, b)

    def test_k_total_out_of_range(self):
        with pytest.raises(ValueError):
            construct_info_set(8, 0, 1.0)
        with pytest.raises(ValueError):
            construct_info_set(8, 9, 1.0)

    def test_file_method_round_trip(self, tmp_path, spec32):
        path = tmp_path / "info.txt"
        write_frozen_set_file(path, 32, spec32.info_set)
        info = construct_info_set(32, 20, method="file", frozen_file=path)
        assert np.array_equal(info, spec32.info_set)
        n, loaded = read_frozen_set_file(path)
        assert n == 32 and np.array_equal(loaded, spec32.info_set)

    @pytest.mark.parametrize("content", [
        "32\n", "31\n1 2 3\n", "32\n5 4\n", "32\n0 99\n", "32\nx y\n",
    ])
    def test_malformed_file(self, tmp_path, content):
        path = tmp_path / "bad.txt"
        path.write_text(content)
        with pytest.raises(FrozenSetFileError):
            construct_info_set(32, 3, method="file", frozen_file=path)

    def test_file_size_mismatch(self, tmp_path):
        path = tmp_path / "info.txt"
        path.write_text("32\n1 2 3\n")
        with pytest.raises(FrozenSetFileError):
            construct_info_set(32, 4, method="file", frozen_file=path)


class TestCodeSpec:
    def test_invariants(self, spec1024):
        assert spec1024.N == 1024 and spec1024.n == 10
        assert spec1024.info_set.size == 144
        assert spec1024.frozen_set.size == 1024 - 144
        assert not set(spec1024.info_set.tolist()) & set(spec1024.frozen_set.tolist())
        assert spec1024.rate == 128 / 1024

    def test_rejects_bad_geometry(self):
        with pytest.raises(ValueError):
            CodeSpec(N=12, k=4, r=0, design_ebno_db=0.0, info_set=np.arange(4))
        with pytest.raises(ValueError):
            CodeSpec(N=8, k=4, r=0, design_ebno_db=0.0, info_set=np.array([1, 1, 2, 3]))
        with pytest.raises(ValueError):
            CodeSpec(N=8, k=3, r=0, design_ebno_db=0.0, info_set=np.array([1, 2]))


class TestCrc16:
    def test_zero_message(self):
        for length in (0, 1, 17, 64):
            assert crc16_compute([0] * length) == 0

    def test_single_division_step(self):
        # z^16 mod (z^16 + z^15 + z^2 + 1) = z^15 + z^2 + 1
        assert crc16_compute([1] + [0] * 16) == 0x8005

    def test_derived_vector_against_oracle(self):
        msg = np.random.default_rng(42).integers(0, 2, 128)
        assert crc16_oracle(msg) == 0x0500
        assert crc16_compute(msg) == 0x0500

    @given(st.binary(min_size=0, max_size=40))
    def test_matches_oracle(self, raw):
        bits = [b & 1 for b in raw]
        assert crc16_compute(bits) == crc16_oracle(bits)

    @given(st.integers(1, 2**60))
    def test_check_round_trip(self, value):
        bits = [int(b) for b in bin(value)[2:]]
        framed = np.concatenate([bits, crc16_bits(bits)])
        assert crc16_check(framed)

    def test_single_bit_corruption_detected(self):
        msg = np.random.default_rng(7).integers(0, 2, 240).astype(np.uint8)
        framed = np.concatenate([msg, crc16_bits(msg)])
        for i in range(framed.size):
            corrupted = framed.copy()
            corrupted[i] ^= 1
            assert not crc16_check(corrupted), f"flip at {i} undetected"


class TestAssemble:
    def test_zero_payload(self, spec32):
        u = assemble_input_vector(np.zeros(4, dtype=np.uint8), spec32)
        assert not u.any()

    def test_single_info_position(self):
        spec = make_code_spec(2, 1, 0, design_ebno_db=1.0)
        assert assemble_input_vector([1], spec).tolist() == [0, 1]

    def test_round_trip(self, spec32):
        rng = np.random.default_rng(3)
        for _ in range(25):
            payload = rng.integers(0, 2, spec32.k, dtype=np.uint8)
            u = assemble_input_vector(payload, spec32)
            assert not u[spec32.frozen_set].any()
            extracted, ok = extract_payload(u, spec32)
            assert ok and np.array_equal(extracted, payload)

    def test_length_mismatch(self, spec32):
        with pytest.raises(ValueError):
            assemble_input_vector([0, 1], spec32)


class TestEncoder:
    def test_all_zero(self):
        assert not polar_encode(np.zeros(16, dtype=np.uint8)).any()

    def test_kernel_row(self):
        assert polar_encode([0, 1]).tolist() == [1, 1]

    def test_n4_matrix_oracle(self):
        assert polar_encode([1, 0, 0, 1]).tolist() == [0, 1, 1, 1]
        assert kron_encode_oracle([1, 0, 0, 1]).tolist() == [0, 1, 1, 1]

    def test_exhaustive_n8_vs_matrix(self):
        for value in range(256):
            u = [(value >> i) & 1 for i in range(8)]
            assert np.array_equal(polar_encode(u), kron_encode_oracle(u))

    @pytest.mark.parametrize("N", [16, 32])
    def test_random_vs_matrix(self, N):
        rng = np.random.default_rng(N)
        for _ in range(50):
            u = rng.integers(0, 2, N, dtype=np.uint8)
            assert np.array_equal(polar_encode(u), kron_encode_oracle(u))

    @given(st.integers(1, 10), st.randoms(use_true_random=False))
    @settings(max_examples=60, deadline=None)
    def test_involution(self, n, rnd):
        N = 1 << n
        u = np.array([rnd.randint(0, 1) for _ in range(N)], dtype=np.uint8)
        assert np.array_equal(polar_encode(polar_encode(u)), u)

    def test_rejects_bad_length(self):
        with pytest.raises(ValueError):
            polar_encode([0, 1, 1])
