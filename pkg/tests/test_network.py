import numpy as np
import pytest

from pcmopt.geometry import BoundarySpec, UnitCellSpec, build_mesh
from pcmopt.materials import builtin_material
from pcmopt.network import assemble_network


@pytest.fixture(scope="module")
def net():
    mesh = build_mesh(UnitCellSpec())
    return assemble_network(mesh, BoundarySpec(),
                            pcm=builtin_material("Solder174"))


def test_edge_conductance_is_harmonic_mean(net):
    phi = np.zeros(net.n_nodes)
    g = net.edge_conductances(phi)
    k = net.k_nodes(phi)
    # silicon-silicon edge reduces to k itself
    si_si = (k[net.edge_i] == 130.0) & (k[net.edge_j] == 130.0)
    assert np.allclose(g[si_si], 130.0)
    # silicon-alumina interface: 2*130*30/160
    si_al = ((k[net.edge_i] == 130.0) & (k[net.edge_j] == 30.0)) | \
            ((k[net.edge_i] == 30.0) & (k[net.edge_j] == 130.0))
    assert si_al.any()
    assert np.allclose(g[si_al], 2 * 130.0 * 30.0 / 160.0)
    # silicon-solder (solid): 2*130*35.8/165.8
    si_pcm = ((k[net.edge_i] == 130.0) & (k[net.edge_j] == 35.8)) | \
             ((k[net.edge_i] == 35.8) & (k[net.edge_j] == 130.0))
    assert np.allclose(g[si_pcm], 2 * 130.0 * 35.8 / 165.8)
    assert np.allclose(g[si_pcm], 56.1399, atol=1e-3)


def test_edge_count_matches_grid(net):
    ny, nx = net.mesh.ny, net.mesh.nx
    assert net.edge_i.size == ny * (nx - 1) + (ny - 1) * nx


def test_convection_attaches_top_and_bottom(net):
    assert net.conv_nodes.size == 2 * net.mesh.nx
    assert np.allclose(net.conv_G, 500.0 * net.mesh.dx)


def test_source_vector_total_power(net):
    q = 100e3
    b = net.source_vector(q)
    assert b.sum() == pytest.approx(q * net.width)
    assert np.count_nonzero(b) == net.mesh.nx
    assert set(np.flatnonzero(b)) == set(net.source_nodes)


def test_laplacian_rows_sum_to_zero(net):
    phi = np.zeros(net.n_nodes)
    L = net.laplacian(phi)
    assert np.allclose(np.asarray(L.sum(axis=1)).ravel(), 0.0, atol=1e-10)


def test_conductance_matrix_symmetric_positive_definite(net):
    phi = np.zeros(net.n_nodes)
    G = net.conductance_matrix(phi)
    assert abs(G - G.T).max() < 1e-12
    # diagonally dominant with positive diagonal -> SPD
    d = G.diagonal()
    off = np.asarray(abs(G).sum(axis=1)).ravel() - abs(d)
    assert np.all(d > 0)
    assert np.all(d >= off - 1e-10)


def test_capacitance_blends_with_melt_fraction(net):
    V = net.volume
    solder = builtin_material("Solder174")
    idx = net.pcm_nodes
    c0 = net.capacitance(net.expand_phi(np.zeros(idx.size)))
    c1 = net.capacitance(net.expand_phi(np.ones(idx.size)))
    assert c0[idx[0]] == pytest.approx(solder.rho_solid * solder.cp_solid * V)
    assert c1[idx[0]] == pytest.approx(solder.rho_liquid * solder.cp_liquid * V)
    si = builtin_material("Silicon")
    non_pcm = np.flatnonzero(~net.is_pcm)[0]
    assert c0[non_pcm] == c1[non_pcm]
    assert c0[non_pcm] in (pytest.approx(si.rho_solid * si.cp_solid * V),
                           pytest.approx(3950.0 * 775.0 * V))


def test_latent_capacity_uses_solid_mass(net):
    solder = builtin_material("Solder174")
    expect = solder.rho_solid * net.volume * solder.L_H
    assert np.allclose(net.latent_capacity, expect)
    assert net.latent_capacity.size == net.pcm_nodes.size == 100


def test_missing_pcm_material_rejected():
    mesh = build_mesh(UnitCellSpec())
    with pytest.raises(ValueError, match="PCM"):
        assemble_network(mesh, BoundarySpec(), pcm=None)
    # but a no-channel mesh is fine without one
    solid = build_mesh(UnitCellSpec(no_channel=True))
    net = assemble_network(solid, BoundarySpec(), pcm=None)
    assert net.pcm_nodes.size == 0
