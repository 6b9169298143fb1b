"""Independent reference implementations used as test oracles.

Everything here is written as explicit scalar loops over antennas and users,
sharing no code with the vectorised package beyond plain numpy/math, so an
agreement check exercises the total-minus-own sums and broadcasting logic.
"""

import math

import numpy as np

FLOOR = 1e-12


def sic_loops(y, H, d_hat, var_d, s_hat, var_s, sigma_w_sq, floor=FLOOR):
    N, K = H.shape
    yd = np.zeros((N, K), complex)
    ys = np.zeros((N, K), complex)
    vd = np.zeros((N, K))
    vs = np.zeros((N, K))
    for n in range(N):
        for k in range(K):
            acc_d, acc_s = y[n], y[n]
            err_d = err_s = sigma_w_sq
            for q in range(K):
                g = abs(H[n, q]) ** 2
                # computing replicas of every user leave the data branch,
                # data replicas of every user leave the computing branch
                acc_d -= H[n, q] * s_hat[n, q]
                acc_s -= H[n, q] * d_hat[n, q]
                err_d += g * var_s[n, q]
                err_s += g * var_d[n, q]
                if q != k:
                    acc_d -= H[n, q] * d_hat[n, q]
                    acc_s -= H[n, q] * s_hat[n, q]
                    err_d += g * var_d[n, q]
                    err_s += g * var_s[n, q]
            yd[n, k], ys[n, k] = acc_d, acc_s
            vd[n, k], vs[n, k] = max(err_d, floor), max(err_s, floor)
    return yd, vd, ys, vs


def extrinsic_loops(y_tilde, var_tilde, H, floor=FLOOR):
    N, K = H.shape
    mean = np.zeros((N, K), complex)
    var = np.zeros((N, K))
    for n in range(N):
        for k in range(K):
            prec = 0.0
            num = 0.0j
            for q in range(N):
                if q == n:
                    continue
                prec += abs(H[q, k]) ** 2 / var_tilde[q, k]
                num += H[q, k].conjugate() * y_tilde[q, k] / var_tilde[q, k]
            v = 1.0 / max(prec, floor)
            mean[n, k] = v * num
            var[n, k] = max(v, floor)
    return mean, var


def consensus_loops(y_tilde, var_tilde, H):
    N, K = H.shape
    out = np.zeros(K, complex)
    for k in range(K):
        num = sum(H[n, k].conjugate() * y_tilde[n, k] / var_tilde[n, k] for n in range(N))
        den = sum(abs(H[n, k]) ** 2 / var_tilde[n, k] for n in range(N))
        out[k] = num / den
    return out


def detector_loops(y, H, *, e_d, sigma_s_sq, sigma_w_sq, beta_d, beta_s, i_max,
                   adaptive=True, beta_mu=None, floor=FLOOR):
    """Whole receiver loop, one scalar at a time.

    Returns a dict with the final consensus, per-user computing estimates,
    mean estimate, antenna-averaged data MSE and the last replica grids.
    """
    N, K = H.shape
    beta_mu = beta_s if beta_mu is None else beta_mu
    c = math.sqrt(e_d / 2)
    d_hat = np.zeros((N, K), complex)
    var_d = np.full((N, K), e_d)
    s_hat = np.zeros((N, K))
    var_s = np.full((N, K), sigma_s_sq)
    mu = 0.0
    s_k = np.zeros(K)
    for it in range(1, i_max + 1):
        yd, vd, ys, vs = sic_loops(y, H, d_hat, var_d, s_hat, var_s, sigma_w_sq, floor)
        d_bar, vd_bar = extrinsic_loops(yd, vd, H, floor)
        s_bar, vs_bar = extrinsic_loops(ys, vs, H, floor)
        new_d = np.zeros((N, K), complex)
        new_vd = np.zeros((N, K))
        new_s = np.zeros((N, K))
        new_vs = np.zeros((N, K))
        prior = mu if adaptive else 0.0
        for n in range(N):
            for k in range(K):
                a = 2 * c / vd_bar[n, k]
                den = c * complex(math.tanh(a * d_bar[n, k].real), math.tanh(a * d_bar[n, k].imag))
                new_d[n, k] = beta_d * den + (1 - beta_d) * d_hat[n, k]
                mse = min(max(e_d - abs(new_d[n, k]) ** 2, 0.0), e_d)
                new_vd[n, k] = beta_d * mse + (1 - beta_d) * var_d[n, k]
                v = vs_bar[n, k]
                shrunk = (sigma_s_sq * s_bar[n, k].real + v * prior) / (v + sigma_s_sq)
                shrunk_var = min(max(sigma_s_sq * v / (v + sigma_s_sq), 0.0), sigma_s_sq)
                new_s[n, k] = beta_s * shrunk + (1 - beta_s) * s_hat[n, k]
                new_vs[n, k] = beta_s * shrunk_var + (1 - beta_s) * var_s[n, k]
        if adaptive or it == i_max:
            _, _, ys2, vs2 = sic_loops(y, H, new_d, new_vd, new_s, new_vs, sigma_w_sq, floor)
            s_k = consensus_loops(ys2, vs2, H).real
        if adaptive:
            mu = beta_mu * float(np.mean(s_k)) + (1 - beta_mu) * mu
        d_hat, var_d, s_hat, var_s = new_d, new_vd, new_s, new_vs
        last = (yd, vd)
    d_cons = consensus_loops(last[0], last[1], H)
    d_soft = np.zeros(K, complex)
    for k in range(K):
        v = 1.0 / sum(abs(H[n, k]) ** 2 / last[1][n, k] for n in range(N))
        a = 2 * c / max(v, floor)
        d_soft[k] = c * complex(math.tanh(a * d_cons[k].real), math.tanh(a * d_cons[k].imag))
    return {
        "d_hat_final": d_cons,
        "d_hat_soft": d_soft,
        "s_hat_final": s_k,
        "mu_s_est": mu,
        "var_d_final": var_d.mean(axis=0),
        "d_hat": d_hat,
        "s_hat": s_hat,
        "var_d": var_d,
        "var_s": var_s,
    }


def expanded_quadratic(H, sigma_s_sq, sigma_w_sq, omega):
    """(A, b, c) of J(u) = u^H A u - 2 Re{u^H b} + c, written out term by term.

    Built from the second moments of r = H (s - e) + w with independent s
    (covariance sigma_s_sq I), data error e (covariance diag(omega)) and
    noise w (covariance sigma_w_sq I), for the target 1^T s.
    """
    N, K = H.shape
    A = np.zeros((N, N), complex)
    for i in range(N):
        for j in range(N):
            A[i, j] = sum(H[i, k] * (sigma_s_sq + omega[k]) * H[j, k].conjugate() for k in range(K))
        A[i, i] += sigma_w_sq
    b = np.array([sigma_s_sq * sum(H[i, k] for k in range(K)) for i in range(N)])
    return A, b, K * sigma_s_sq


def minimise_quadratic(A, b, tol=1e-12, max_iter=100_000):
    """Conjugate-gradient descent on J(u) = u^H A u - 2 Re{u^H b}.

    Gradient (Wirtinger, w.r.t. conj(u)) is A u - b. No factorisation or
    explicit inverse is used.
    """
    u = np.zeros_like(b)
    r = b - A @ u
    p = r.copy()
    rs = np.vdot(r, r).real
    for _ in range(max_iter):
        if math.sqrt(rs) < tol:
            break
        Ap = A @ p
        alpha = rs / np.vdot(p, Ap).real
        u = u + alpha * p
        r = r - alpha * Ap
        rs_new = np.vdot(r, r).real
        p = r + (rs_new / rs) * p
        rs = rs_new
    return u


def rel_err(a, b):
    """Normwise relative error ||a - b|| / max(||b||, tiny)."""
    a = np.asarray(a)
    b = np.asarray(b)
    return float(np.linalg.norm(a - b) / max(np.linalg.norm(b), 1e-300))


def random_instance(rng, N, K, snr_db=10.0, e_d=0.99):
    sigma_s_sq = 1 - e_d
    H = (rng.standard_normal((N, K)) + 1j * rng.standard_normal((N, K))) / math.sqrt(2)
    c = math.sqrt(e_d / 2)
    d = c * (rng.choice([-1, 1], K) + 1j * rng.choice([-1, 1], K))
    s = math.sqrt(sigma_s_sq) * rng.standard_normal(K)
    w2 = 10 ** (-snr_db / 10)
    w = math.sqrt(w2 / 2) * (rng.standard_normal(N) + 1j * rng.standard_normal(N))
    return H, d, s, H @ (d + s) + w, w2
