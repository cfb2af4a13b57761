"""Numba inner loops for the retarded-frame Maxwell-Schrodinger march.

The atomic pair (c1, c2) at one spatial slice evolves under the local field
with classic RK4, the field linearly interpolated at half steps:

    dc1/dt = i (Omega/2) c2
    dc2/dt = i (conj(Omega)/2) c1 - i Delta c2

The conjugate in the second line is the Hermitian form of the coupling; it
coincides with the real-field equations whenever Omega is real and is what
keeps |c1|^2 + |c2|^2 exactly conserved for complex fields.

Field marching along x is Heun (predictor-corrector), second order in dx.
All loops are serial with a fixed summation order so results are
bit-reproducible regardless of thread or worker count.
"""

import numpy as np
from numba import njit

__all__ = ["evolve_slice", "march"]


@njit(cache=True)
def _evolve(omega, delta, weights, c1_0, c2_0, dt, pol, c1, c2, store, c1_traj, c2_traj):
    """RK4 over the whole window at one slice; fills pol, returns max norm deviation.

    c1/c2 are work arrays (K,) left holding the final state.  When store is
    True the full trajectories are written to c1_traj/c2_traj (n_t, K).
    """
    n_t = omega.shape[0]
    K = delta.shape[0]
    max_dev = 0.0
    p = 0.0 + 0.0j
    for k in range(K):
        c1[k] = c1_0
        c2[k] = c2_0
        p += weights[k] * c1[k] * np.conj(c2[k])
        if store:
            c1_traj[0, k] = c1_0
            c2_traj[0, k] = c2_0
    pol[0] = p
    for m in range(n_t - 1):
        w0 = omega[m]
        w1 = omega[m + 1]
        wh = 0.5 * (w0 + w1)
        w0c = np.conj(w0)
        whc = np.conj(wh)
        w1c = np.conj(w1)
        p = 0.0 + 0.0j
        for k in range(K):
            a = c1[k]
            b = c2[k]
            dd = delta[k]
            k1a = 0.5j * w0 * b
            k1b = 0.5j * w0c * a - 1j * dd * b
            a2 = a + 0.5 * dt * k1a
            b2 = b + 0.5 * dt * k1b
            k2a = 0.5j * wh * b2
            k2b = 0.5j * whc * a2 - 1j * dd * b2
            a3 = a + 0.5 * dt * k2a
            b3 = b + 0.5 * dt * k2b
            k3a = 0.5j * wh * b3
            k3b = 0.5j * whc * a3 - 1j * dd * b3
            a4 = a + dt * k3a
            b4 = b + dt * k3b
            k4a = 0.5j * w1 * b4
            k4b = 0.5j * w1c * a4 - 1j * dd * b4
            a = a + dt / 6.0 * (k1a + 2.0 * k2a + 2.0 * k3a + k4a)
            b = b + dt / 6.0 * (k1b + 2.0 * k2b + 2.0 * k3b + k4b)
            c1[k] = a
            c2[k] = b
            nrm = a.real * a.real + a.imag * a.imag + b.real * b.real + b.imag * b.imag
            dev = abs(1.0 - nrm)
            if dev > max_dev:
                max_dev = dev
            p += weights[k] * a * np.conj(b)
            if store:
                c1_traj[m + 1, k] = a
                c2_traj[m + 1, k] = b
        pol[m + 1] = p
    return max_dev


@njit(cache=True)
def evolve_slice(omega, delta, weights, c1_0, c2_0, dt):
    """Trajectories, polarization and max norm deviation for one slice.

    Returns (c1_traj, c2_traj, pol, max_dev) with trajectories shaped
    (n_t, K) and pol the weighted sum of c1 conj(c2) per time node.
    """
    n_t = omega.shape[0]
    K = delta.shape[0]
    c1_traj = np.empty((n_t, K), dtype=np.complex128)
    c2_traj = np.empty((n_t, K), dtype=np.complex128)
    pol = np.empty(n_t, dtype=np.complex128)
    c1 = np.empty(K, dtype=np.complex128)
    c2 = np.empty(K, dtype=np.complex128)
    max_dev = _evolve(omega, delta, weights, c1_0, c2_0, dt, pol, c1, c2, True, c1_traj, c2_traj)
    return c1_traj, c2_traj, pol, max_dev


@njit(cache=True)
def march(
    boundary,
    x_nodes,
    t_nodes,
    delta,
    weights,
    c1_init,
    c2_init,
    g,
    c_light,
    probe_idx,
    store_field,
    abort_dev,
):
    """Heun march of the field from the entrance to the exit face.

    Per step: (1) evolve atoms at slice i under its corrected field and form
    the polarization, (2) predict the next field, (3) evolve atoms at slice
    i+1 under the prediction, (4) correct with the averaged source.  Atom
    histories are recorded at the probe slices from their corrected field.

    Returns (omega_record, output_series, c1_probe, c2_probe, c1_final,
    c2_final, max_dev, bad_slice).  omega_record is (n_x, n_t) when
    store_field else (0, 0).  bad_slice >= 0 flags the first slice whose
    field went non-finite or whose norm deviation exceeded abort_dev;
    the march stops there.
    """
    n_x = x_nodes.shape[0]
    n_t = t_nodes.shape[0]
    K = delta.shape[0]
    dt = t_nodes[1] - t_nodes[0]
    coef = -1j * g / c_light
    n_probe = probe_idx.shape[0]

    if store_field:
        record = np.empty((n_x, n_t), dtype=np.complex128)
    else:
        record = np.empty((0, 0), dtype=np.complex128)
    c1_probe = np.empty((n_probe, n_t, K), dtype=np.complex128)
    c2_probe = np.empty((n_probe, n_t, K), dtype=np.complex128)
    c1_final = np.empty((n_x, K), dtype=np.complex128)
    c2_final = np.empty((n_x, K), dtype=np.complex128)
    dummy1 = np.empty((0, 0), dtype=np.complex128)
    dummy2 = np.empty((0, 0), dtype=np.complex128)

    om_cur = boundary.copy()
    om_pred = np.empty(n_t, dtype=np.complex128)
    pol_cur = np.empty(n_t, dtype=np.complex128)
    pol_pred = np.empty(n_t, dtype=np.complex128)
    c1 = np.empty(K, dtype=np.complex128)
    c2 = np.empty(K, dtype=np.complex128)

    max_dev = 0.0
    bad_slice = -1

    for i in range(n_x):
        if store_field:
            record[i, :] = om_cur
        for m in range(n_t):
            v = om_cur[m]
            if not (np.isfinite(v.real) and np.isfinite(v.imag)):
                bad_slice = i
                break
        if bad_slice >= 0:
            break

        # corrected-field evolution at slice i; probes store trajectories
        store = False
        pslot = 0
        for j in range(n_probe):
            if probe_idx[j] == i:
                store = True
                pslot = j
        if store:
            dev = _evolve(
                om_cur, delta, weights, c1_init[i], c2_init[i], dt,
                pol_cur, c1, c2, True, c1_probe[pslot], c2_probe[pslot],
            )
        else:
            dev = _evolve(
                om_cur, delta, weights, c1_init[i], c2_init[i], dt,
                pol_cur, c1, c2, False, dummy1, dummy2,
            )
        if dev > max_dev:
            max_dev = dev
        c1_final[i, :] = c1
        c2_final[i, :] = c2
        if max_dev > abort_dev:
            bad_slice = i
            break
        if i == n_x - 1:
            break

        dx = x_nodes[i + 1] - x_nodes[i]
        for m in range(n_t):
            om_pred[m] = om_cur[m] + dx * coef * pol_cur[m]
        dev = _evolve(
            om_pred, delta, weights, c1_init[i + 1], c2_init[i + 1], dt,
            pol_pred, c1, c2, False, dummy1, dummy2,
        )
        for m in range(n_t):
            om_cur[m] = om_cur[m] + 0.5 * dx * coef * (pol_cur[m] + pol_pred[m])

    output = om_cur.copy()
    return record, output, c1_probe, c2_probe, c1_final, c2_final, max_dev, bad_slice
