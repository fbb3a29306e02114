#!/usr/bin/env python3
"""Computes reference values for the unit/acceptance tests from first
principles (direct formula evaluation, quadrature, brute-force iteration)
and writes them to tests/fixtures/expected_values.json.

Run from the repository root:  python3 scripts/compute_expected_values.py
"""
import json
import math
import os

import numpy as np

OUT = os.path.join(os.path.dirname(__file__), "..", "tests", "fixtures",
                   "expected_values.json")

# Munich stripmap stack parameters
WAVELENGTH = 0.031
RANGE = 698e3
INCIDENCE_DEG = 50.4
BASELINES = [184.40, 171.92, 32.30, -2.78, 9.30]

vals = {}

# --- geometry scalars -------------------------------------------------------
vals["wavenumber_b184p40"] = -4.0 * math.pi * 184.40 / (WAVELENGTH * RANGE)

aperture = max(BASELINES) - min(BASELINES)
vals["aperture_m"] = aperture
rho_s = WAVELENGTH * RANGE / (2.0 * aperture)
vals["rayleigh_resolution_m"] = rho_s
vals["normalized_distance_at_rho"] = rho_s / rho_s

sigma_b = float(np.std(BASELINES))  # population std
vals["baseline_pop_std_m"] = sigma_b

snr = 10.0 ** (10.0 / 10.0)  # 10 dB
n = 5
vals["crlb_single_snr10db_n5_m"] = WAVELENGTH * RANGE / (
    4.0 * math.pi * sigma_b * math.sqrt(2.0 * snr * n))

# --- correction factor ------------------------------------------------------
def c0_exact(kappa, dphi):
    denom = 9.0 - 6.0 * (3.0 - 2.0 * kappa) * math.cos(2.0 * dphi) \
        + (3.0 - 2.0 * kappa) ** 2
    rad = 40.0 * kappa ** -2 * (1.0 - kappa / 3.0) / denom
    if rad <= 0.0:
        return 1.0
    return max(math.sqrt(rad), 1.0)

def c0_approx(kappa):
    return max(2.57 * (kappa ** -1.5 - 0.11) ** 2 + 0.62, 1.0)

vals["c0_exact_k1_dphi0"] = c0_exact(1.0, 0.0)
vals["c0_exact_k2p5_dphi_pi4"] = c0_exact(2.5, math.pi / 4.0)
vals["c0_approx_k1"] = c0_approx(1.0)
vals["c0_approx_k0p6"] = c0_approx(0.6)
# clamp onset: solve 2.57 (k^-1.5 - 0.11)^2 + 0.62 = 1 by bisection
lo, hi = 1.0, 3.0
for _ in range(200):
    mid = 0.5 * (lo + hi)
    if 2.57 * (mid ** -1.5 - 0.11) ** 2 + 0.62 > 1.0:
        lo = mid
    else:
        hi = mid
vals["c0_approx_clamp_onset_kappa"] = 0.5 * (lo + hi)
vals["crlb_double_k1_snr10db_n5_m"] = c0_approx(1.0) * vals["crlb_single_snr10db_n5_m"]

# --- height of ambiguity ----------------------------------------------------
theta = math.radians(INCIDENCE_DEG)
vals["height_ambiguity_b184p40_m"] = WAVELENGTH * RANGE * math.sin(theta) / (
    2.0 * 184.40)

# --- elevation to height ----------------------------------------------------
vals["height_of_s57p80_m"] = 57.80 * math.sin(theta)

# --- Goodman density normalization (mu = 0.5, sigma2 = 1) -------------------
# numeric quadrature over (i1, i2, phi); density should integrate to ~1
def goodman(i1, i2, phi, psi, mu, s2):
    pref = 1.0 / (16.0 * math.pi ** 2 * s2 ** 2 * (1.0 - mu ** 2))
    ex = -(i1 + i2 - 2.0 * math.sqrt(i1 * i2) * mu * math.cos(phi - psi)) / (
        2.0 * s2 * (1.0 - mu ** 2))
    return pref * 2.0 * math.pi * math.exp(ex)
# note: Goodman's joint density of (I1, I2, phi) carries 1/(16 pi^2 ...)
# with an extra modified-Bessel marginalization already absorbed; the
# expression above times 2*pi accounts for the phase of the second channel.

i = np.linspace(1e-4, 30.0, 400)
p = np.linspace(-math.pi, math.pi, 181)
I1, I2, P = np.meshgrid(i, i, p, indexing="ij")
pref = 1.0 / (16.0 * math.pi ** 2 * (1.0 - 0.25))
dens = pref * 2.0 * math.pi * np.exp(
    -(I1 + I2 - 2.0 * np.sqrt(I1 * I2) * 0.5 * np.cos(P)) / (2.0 * 0.75))
mass = float(np.trapz(np.trapz(np.trapz(dens, p, axis=2), i, axis=1), i, axis=0))
vals["goodman_mass_mu0p5_sigma1"] = mass

# --- WMLE single pixel g1 = 1, g2 = i ---------------------------------------
g1, g2 = 1.0 + 0.0j, 0.0 + 1.0j
vals["wmle_single_psi"] = -float(np.angle(g1 * np.conj(g2)))
vals["wmle_single_mu"] = 2.0 * abs(g1) * abs(g2) / (abs(g1) ** 2 + abs(g2) ** 2)
vals["wmle_single_sigma2"] = (abs(g1) ** 2 + abs(g2) ** 2) / 4.0

# --- IRLS fused value for {0,0,0,100}, Tukey c = 4.685 ----------------------
def tukey_w(x, c):
    ax = abs(x)
    if ax >= c:
        return 0.0
    t = 1.0 - (x / c) ** 2
    return t * t

samples = np.array([0.0, 0.0, 0.0, 100.0])
est = float(np.median(samples))
mad = float(np.median(np.abs(samples - np.median(samples)))) * 1.4826
scale = mad if mad > 1e-12 else 1.0
for _ in range(200):
    w = np.array([tukey_w((s - est) / scale, 4.685) for s in samples])
    if w.sum() <= 0.0:
        break
    new = float((w * samples).sum() / w.sum())
    if abs(new - est) < 1e-9:
        est = new
        break
    est = new
vals["irls_fused_outlier_set"] = est

# --- Sobel step response ----------------------------------------------------
# vertical step of height h: interior column adjacent to the step sees
# gradient magnitude 4h from the x-kernel [[-1,0,1],[-2,0,2],[-1,0,1]]
h_step = 7.0
img = np.zeros((5, 6))
img[:, 3:] = h_step
kx = np.array([[-1, 0, 1], [-2, 0, 2], [-1, 0, 1]], float)
ky = kx.T
gx = sum(kx[a, b] * img[2 + a - 1, 2 + b - 1] for a in range(3) for b in range(3))
gy = sum(ky[a, b] * img[2 + a - 1, 2 + b - 1] for a in range(3) for b in range(3))
vals["sobel_step_peak_over_h"] = math.hypot(gx, gy) / h_step

# --- parabolic peak refinement on a sampled Gaussian ------------------------
xs = np.arange(-5, 6, 1.0)
center = 0.237
ys = np.exp(-0.5 * ((xs - center) / 2.0) ** 2)
k0 = int(np.argmax(ys))
ym, y0, yp = ys[k0 - 1], ys[k0], ys[k0 + 1]
refined = xs[k0] + 0.5 * (ym - yp) / (ym - 2.0 * y0 + yp)
vals["parabolic_gaussian_center_error"] = abs(refined - center)

os.makedirs(os.path.dirname(OUT), exist_ok=True)
with open(OUT, "w") as f:
    json.dump({k: vals[k] for k in sorted(vals)}, f, indent=2)
print(f"wrote {os.path.normpath(OUT)}")
for k in sorted(vals):
    print(f"  {k} = {vals[k]:.9g}")
