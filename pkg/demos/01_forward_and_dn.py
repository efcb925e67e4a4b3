"""Forward solves and the Dirichlet-to-Neumann difference.

Builds a small square domain, a smooth convection field V and a perturbed
copy V + eps W, then estimates the DN-difference surrogate for a few
contrasts.  The surrogate grows linearly with the contrast at this scale.

    python3 demos/01_forward_and_dn.py
"""
from wavestab.fields import vector_bump
from wavestab.geometry import Domain, Grid, omega_mesh
from wavestab.wave import DnOperator, dn_norm_estimate

dom = Domain(omega_half_width=0.5, box_half_width=1.0, rho=0.25)
grid = Grid.build(dom, 1 / 32, dom.min_time + 0.1)
mesh = omega_mesh(dom, grid)
print(f"grid {grid.nx}x{grid.ny}, {grid.nt} steps, {mesh.nsamples} boundary samples")

base = vector_bump(grid, "uniform", (0.0, 0.0), 0.3, 0.05, (1.0, 0.5)).values
W = vector_bump(grid, "swirl", (0.05, -0.05), 0.3, 1.0).values
ref = DnOperator(base, mesh)
for eps in (0.2, 0.1, 0.05):
    d = dn_norm_estimate(DnOperator(base + eps * W, mesh), ref, basis_size=8)
    print(f"eps {eps:5.2f}  dn_norm {d:.4e}  dn_norm/eps {d / eps:.4e}")
