import numpy as np
import pytest

from polarflip import make_code_spec


@pytest.fixture(scope="session")
def spec8():
    """P(8,4) with no CRC; information set {3, 5, 6, 7}."""
    return make_code_spec(8, 4, 0, design_ebno_db=2.0)


@pytest.fixture(scope="session")
def spec32():
    """Smallest code that fits a CRC-16: N=32, k=4, r=16."""
    return make_code_spec(32, 4, 16, design_ebno_db=1.25)


@pytest.fixture(scope="session")
def spec1024():
    """The headline low-rate code: P(1024,128) with r=16."""
    return make_code_spec(1024, 128, 16, design_ebno_db=1.25, label="P1024_128")


def sc_reference_decode(alpha_ch, frozen_mask, flip_mask):
    """Recursive SC decoder, structured independently of the engine."""
    alpha_ch = np.asarray(alpha_ch, dtype=float)
    N = alpha_ch.size
    u_hat = np.zeros(N, dtype=np.uint8)
    alpha_dec = np.zeros(N, dtype=float)

    def rec(alpha, base):
        if alpha.size == 1:
            alpha_dec[base] = alpha[0]
            if frozen_mask[base]:
                u_hat[base] = 0
            else:
                u_hat[base] = (1 if alpha[0] < 0 else 0) ^ flip_mask[base]
            return u_hat[base: base + 1].copy()
        h = alpha.size // 2
        f = np.sign(alpha[:h]) * np.sign(alpha[h:]) * np.minimum(np.abs(alpha[:h]), np.abs(alpha[h:]))
        beta_l = rec(f, base)
        g = (1.0 - 2.0 * beta_l.astype(float)) * alpha[:h] + alpha[h:]
        beta_r = rec(g, base + h)
        return np.concatenate([beta_l ^ beta_r, beta_r])

    rec(alpha_ch, 0)
    return u_hat, alpha_dec
