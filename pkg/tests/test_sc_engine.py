import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from polarflip import (combine_partial_sums, f_func, g_func, lsc_closed_form,
                       make_code_spec, modulate_bpsk, polar_encode, sc_pass,
                       scheduled_cycles)
from polarflip.channel import llr_from_channel
from polarflip.sc_engine import DecoderWorkspace, schedule_trace, write_trace_csv

from conftest import sc_reference_decode


def straight_line_sc8(a, frozen):
    """Hand-unrolled SC for N=8: every f/g/decision written out explicitly."""
    f = lambda x, y: np.sign(x) * np.sign(y) * min(abs(x), abs(y))
    g = lambda x, y, b: (1 - 2 * b) * x + y
    hard = lambda v: 1 if v < 0 else 0
    u = [0] * 8

    l3_0, l3_1, l3_2, l3_3 = f(a[0], a[4]), f(a[1], a[5]), f(a[2], a[6]), f(a[3], a[7])
    l2_0, l2_1 = f(l3_0, l3_2), f(l3_1, l3_3)
    u[0] = 0 if frozen[0] else hard(f(l2_0, l2_1))
    u[1] = 0 if frozen[1] else hard(g(l2_0, l2_1, u[0]))
    b1_0, b1_1 = u[0] ^ u[1], u[1]
    r2_0, r2_1 = g(l3_0, l3_2, b1_0), g(l3_1, l3_3, b1_1)
    u[2] = 0 if frozen[2] else hard(f(r2_0, r2_1))
    u[3] = 0 if frozen[3] else hard(g(r2_0, r2_1, u[2]))
    beta_left = [u[0] ^ u[1] ^ u[2] ^ u[3], u[1] ^ u[3], u[2] ^ u[3], u[3]]
    r3 = [g(a[i], a[i + 4], beta_left[i]) for i in range(4)]
    l2_0, l2_1 = f(r3[0], r3[2]), f(r3[1], r3[3])
    u[4] = 0 if frozen[4] else hard(f(l2_0, l2_1))
    u[5] = 0 if frozen[5] else hard(g(l2_0, l2_1, u[4]))
    b1_0, b1_1 = u[4] ^ u[5], u[5]
    r2_0, r2_1 = g(r3[0], r3[2], b1_0), g(r3[1], r3[3], b1_1)
    u[6] = 0 if frozen[6] else hard(f(r2_0, r2_1))
    u[7] = 0 if frozen[7] else hard(g(r2_0, r2_1, u[6]))
    return np.array(u, dtype=np.uint8)


class TestNodeOps:
    def test_f_examples(self):
        assert f_func(2.0, -3.0) == -2.0
        assert f_func(5.0, 0.0) == 0.0
        assert f_func(-7.0, 0.0) == 0.0
        assert f_func(0.5, 4.0) == 0.5

    def test_g_examples(self):
        assert g_func(1.0, 2.0, 0) == 3.0
        assert g_func(1.0, 2.0, 1) == 1.0
        assert g_func(-2.0, 5.0, 1) == 7.0

    def test_combine_examples(self):
        assert combine_partial_sums([1], [0]).tolist() == [1, 0]
        assert combine_partial_sums([0, 0], [0, 0]).tolist() == [0, 0, 0, 0]
        assert combine_partial_sums([1, 0], [1, 1]).tolist() == [0, 1, 1, 1]
        with pytest.raises(ValueError):
            combine_partial_sums([1], [0, 1])

    @given(st.floats(-50, 50), st.floats(-50, 50))
    def test_f_bounded_by_min_magnitude(self, a, d):
        assert abs(f_func(a, d)) == pytest.approx(min(abs(a), abs(d)))


class TestScPass:
    def test_noiseless_all_zero(self, spec8):
        res = sc_pass(np.full(8, 3.0), spec8)
        assert not res.u_hat.any()
        assert (res.alpha_dec > 0).all()

    def test_tiny_n_straight_line_oracle(self, spec8):
        rng = np.random.default_rng(12)
        weak = np.array([1, 1, 1, 1, 1, 1, 1, -1.0])
        assert np.array_equal(sc_pass(weak, spec8).u_hat,
                              straight_line_sc8(weak, spec8.frozen_mask))
        for _ in range(200):
            alpha = rng.normal(size=8) * 3
            assert np.array_equal(sc_pass(alpha, spec8).u_hat,
                                  straight_line_sc8(alpha, spec8.frozen_mask))

    @pytest.mark.parametrize("N", [2, 4, 16, 64, 256])
    def test_matches_recursive_reference(self, N):
        spec = make_code_spec(N, max(N // 2 - 16, 1), 16 if N // 2 > 16 else 0,
                              design_ebno_db=1.0)
        rng = np.random.default_rng(N)
        for trial in range(30):
            alpha = rng.normal(size=N) * 2
            flip_mask = np.zeros(N, dtype=np.uint8)
            flips = ()
            if trial % 2:
                take = min(2, spec.info_set.size)
                flips = tuple(sorted(rng.choice(spec.info_set, take, replace=False).tolist()))
                flip_mask[list(flips)] = 1
            res = sc_pass(alpha, spec, flip_set=flips)
            u_ref, a_ref = sc_reference_decode(alpha, spec.frozen_mask, flip_mask)
            assert np.array_equal(res.u_hat, u_ref)
            assert np.array_equal(res.alpha_dec, a_ref)

    def test_decode_of_encode(self, spec32):
        rng = np.random.default_rng(1)
        from polarflip import assemble_input_vector
        from polarflip.flip_decoder import extract_payload
        for _ in range(20):
            payload = rng.integers(0, 2, spec32.k, dtype=np.uint8)
            u = assemble_input_vector(payload, spec32)
            alpha = llr_from_channel(modulate_bpsk(polar_encode(u)), 0.8)
            res = sc_pass(alpha, spec32)
            extracted, ok = extract_payload(res.u_hat, spec32)
            assert ok and np.array_equal(extracted, payload)
            assert np.array_equal(res.u_hat, u)

    def test_flip_changes_target_bit(self, spec8):
        alpha = np.full(8, 2.5)
        base = sc_pass(alpha, spec8)
        flipped = sc_pass(alpha, spec8, flip_set=(5,))
        assert flipped.u_hat[5] == base.u_hat[5] ^ 1

    def test_flip_causality(self, spec1024):
        rng = np.random.default_rng(77)
        for _ in range(10):
            alpha = rng.normal(size=1024) * 2
            j = int(rng.choice(spec1024.info_set))
            base = sc_pass(alpha, spec1024)
            flipped = sc_pass(alpha, spec1024, flip_set=(j,))
            assert np.array_equal(base.u_hat[:j], flipped.u_hat[:j])
            assert flipped.u_hat[j] == base.u_hat[j] ^ 1
            assert np.array_equal(base.alpha_dec[:j + 1], flipped.alpha_dec[:j + 1])

    def test_rejects_frozen_flip(self, spec8):
        with pytest.raises(ValueError, match="frozen"):
            sc_pass(np.ones(8), spec8, flip_set=(0,))

    def test_midpoint_requires_snapshot(self, spec8):
        with pytest.raises(ValueError, match="snapshot"):
            sc_pass(np.ones(8), spec8, start="midpoint")

    def test_midpoint_rejects_left_flips(self, spec8):
        snap = sc_pass(np.ones(8), spec8).snapshot
        with pytest.raises(ValueError, match="left-half"):
            sc_pass(np.ones(8), spec8, flip_set=(3,), start="midpoint", snapshot=snap)


class TestMidpointRestart:
    @pytest.mark.parametrize("N", [8, 64, 1024])
    def test_equivalence_on_random_frames(self, N):
        # The core restart-correctness property: identical right-half outputs
        # and strictly fewer cycles, for flips entirely in the right half.
        spec = make_code_spec(N, max(N // 2 - 16, 1), 16 if N // 2 > 16 else 0,
                              design_ebno_db=1.25)
        rhs_info = spec.info_set[spec.info_set >= N // 2]
        rng = np.random.default_rng(N + 1)
        ws = DecoderWorkspace(N)
        for _ in range(60):
            alpha = rng.normal(size=N) * 2
            flips = tuple(sorted(rng.choice(rhs_info, min(3, rhs_info.size),
                                            replace=False).tolist()))
            snap = sc_pass(alpha, spec, workspace=ws).snapshot
            full = sc_pass(alpha, spec, flip_set=flips, workspace=ws)
            mid = sc_pass(alpha, spec, flip_set=flips, start="midpoint",
                          snapshot=snap, workspace=ws)
            assert np.array_equal(mid.u_hat, full.u_hat)
            assert np.array_equal(mid.alpha_dec[N // 2:], full.alpha_dec[N // 2:])
            assert np.isnan(mid.alpha_dec[: N // 2]).all()
            assert mid.cycles < full.cycles

    def test_snapshot_contents(self, spec8):
        rng = np.random.default_rng(4)
        alpha = rng.normal(size=8)
        res = sc_pass(alpha, spec8)
        snap = res.snapshot
        assert snap.psi_rest == 3
        assert np.array_equal(snap.u_hat_rest, res.u_hat[:4])
        # The stored partial sums are the re-encoded left-half estimates.
        assert np.array_equal(snap.beta_rest, polar_encode(res.u_hat[:4]))

    def test_midpoint_cycles_1024(self, spec1024):
        snap = sc_pass(np.ones(1024), spec1024).snapshot
        mid = sc_pass(np.ones(1024), spec1024, start="midpoint", snapshot=snap)
        assert mid.cycles == 1542  # root g 8 + right-half alpha 1032 + beta 502


class TestCycleModel:
    def test_closed_form_examples(self):
        assert lsc_closed_form(1024, 64) == 3093
        assert lsc_closed_form(8, 2) == 20
        assert lsc_closed_form(16, 2) == 51
        assert lsc_closed_form(512, 64) == 1534

    def test_closed_form_domain(self):
        with pytest.raises(ValueError):
            lsc_closed_form(8, 4)
        with pytest.raises(ValueError):
            lsc_closed_form(12, 2)

    def test_counter_matches_closed_form_everywhere(self):
        for n in range(3, 13):
            N = 1 << n
            P = 2
            while 4 * P <= N:
                spec = make_code_spec(N, N // 2, 0, design_ebno_db=1.0)
                measured = sc_pass(np.ones(N), spec, pe_count=P).cycles
                assert measured == lsc_closed_form(N, P) == scheduled_cycles(N, P)
                P *= 2

    def test_counter_valid_beyond_closed_form(self):
        # 4P > N: the closed form is undefined but the counter still runs.
        spec = make_code_spec(8, 4, 0, design_ebno_db=1.0)
        assert sc_pass(np.ones(8), spec, pe_count=8).cycles == scheduled_cycles(8, 8)

    def test_schedule_trace_structure(self, tmp_path):
        rows = schedule_trace(8, 2)
        assert rows[0][:2] == (1, "f")
        assert sum(c for _, _, _, c in rows) == 20
        combos = [(n, c) for n, s, _, c in rows if s == "combine"]
        assert sum(c for _, c in combos) == 8 - 3 - 1
        # Rightmost-path nodes (1, 3, 7) combine for free.
        assert {n for n, c in combos if c == 0} == {1, 3, 7}
        path = tmp_path / "trace.csv"
        write_trace_csv(path, 8, 2)
        assert path.read_text().splitlines()[0] == "node,stage,width,cycles"

    def test_midpoint_schedule(self):
        assert scheduled_cycles(1024, 64, "midpoint") == 1542
        for N, P in ((8, 2), (64, 8), (256, 16)):
            n = N.bit_length() - 1
            spec = make_code_spec(N, N // 2, 0, design_ebno_db=1.0)
            snap = sc_pass(np.ones(N), spec, pe_count=P).snapshot
            mid = sc_pass(np.ones(N), spec, start="midpoint", snapshot=snap,
                          pe_count=P)
            assert mid.cycles == scheduled_cycles(N, P, "midpoint")
