use super::{ScalarField, Staggering, VectorField, WallValues, ZBc};
use crate::error::{BllError, Result};

/// Gradient of a cell-centered field onto the MAC faces. Wall rows of the
/// vertical component are zero, which is what makes [`div`] its negative
/// adjoint.
pub fn grad(f: &ScalarField) -> Result<VectorField> {
    f.require(Staggering::Center)?;
    let g = *f.grid();
    let (nx, nz) = (g.nx, g.nz);
    let v = f.values();
    let mut u = vec![0.0; nx * nz];
    for j in 0..nz {
        let row = &v[j * nx..(j + 1) * nx];
        for i in 0..nx {
            let im = if i == 0 { nx - 1 } else { i - 1 };
            u[j * nx + i] = (row[i] - row[im]) / g.dx;
        }
    }
    let mut w = vec![0.0; nx * (nz + 1)];
    for j in 1..nz {
        for i in 0..nx {
            w[j * nx + i] = (v[j * nx + i] - v[(j - 1) * nx + i]) / g.dz;
        }
    }
    Ok(VectorField {
        u: ScalarField::from_vec(g, Staggering::XFace, u)?,
        w: ScalarField::from_vec(g, Staggering::ZFace, w)?,
    })
}

/// Cell-centered divergence of a MAC vector field.
pub fn div(v: &VectorField) -> Result<ScalarField> {
    let g = *v.grid();
    let (nx, nz) = (g.nx, g.nz);
    let (u, w) = (v.u.values(), v.w.values());
    let mut out = vec![0.0; nx * nz];
    for j in 0..nz {
        for i in 0..nx {
            let ip = if i + 1 == nx { 0 } else { i + 1 };
            out[j * nx + i] = (u[j * nx + ip] - u[j * nx + i]) / g.dx
                + (w[(j + 1) * nx + i] - w[j * nx + i]) / g.dz;
        }
    }
    ScalarField::from_vec(g, Staggering::Center, out)
}

/// Five-point Laplacian, periodic in `x`.
///
/// Center and x-face fields use a ghost row behind each wall: a copy of the
/// first row for Neumann, the linear reflection `2b - f` for Dirichlet. For
/// z-face fields the wall rows are boundary nodes; Dirichlet values replace
/// them and the returned wall rows are zero.
pub fn laplacian(f: &ScalarField, bc: &ZBc) -> Result<ScalarField> {
    let g = *f.grid();
    let (nx, nz) = (g.nx, g.nz);
    let v = f.values();
    let (idx2, idz2) = (1.0 / (g.dx * g.dx), 1.0 / (g.dz * g.dz));
    let mut out = ScalarField::zeros(g, f.staggering());
    let o = out.values_mut();
    let xpart = |row: &[f64], i: usize| {
        let im = if i == 0 { nx - 1 } else { i - 1 };
        let ip = if i + 1 == nx { 0 } else { i + 1 };
        (row[ip] - 2.0 * row[i] + row[im]) * idx2
    };
    match f.staggering() {
        Staggering::Center | Staggering::XFace => {
            if let ZBc::Dirichlet(w) = bc {
                w.check(nx)?;
            }
            for j in 0..nz {
                let row = &v[j * nx..(j + 1) * nx];
                for i in 0..nx {
                    let c = row[i];
                    let below = if j > 0 {
                        v[(j - 1) * nx + i]
                    } else {
                        match bc {
                            ZBc::Neumann => c,
                            ZBc::Dirichlet(w) => 2.0 * w.bottom[i] - c,
                        }
                    };
                    let above = if j + 1 < nz {
                        v[(j + 1) * nx + i]
                    } else {
                        match bc {
                            ZBc::Neumann => c,
                            ZBc::Dirichlet(w) => 2.0 * w.top[i] - c,
                        }
                    };
                    o[j * nx + i] = xpart(row, i) + (above - 2.0 * c + below) * idz2;
                }
            }
        }
        Staggering::ZFace => {
            let walls = match bc {
                ZBc::Dirichlet(w) => w,
                ZBc::Neumann => {
                    return Err(BllError::Shape(
                        "z-face fields carry wall nodes and need Dirichlet data".into(),
                    ))
                }
            };
            walls.check(nx)?;
            for j in 1..nz {
                let row = &v[j * nx..(j + 1) * nx];
                for i in 0..nx {
                    let below = if j == 1 { walls.bottom[i] } else { v[(j - 1) * nx + i] };
                    let above = if j + 1 == nz { walls.top[i] } else { v[(j + 1) * nx + i] };
                    o[j * nx + i] = xpart(row, i) + (above - 2.0 * row[i] + below) * idz2;
                }
            }
        }
    }
    Ok(out)
}

/// Average of the two cells adjacent to each x-face.
pub fn center_to_xface(f: &ScalarField) -> Result<ScalarField> {
    f.require(Staggering::Center)?;
    let g = *f.grid();
    let nx = g.nx;
    let v = f.values();
    let mut out = vec![0.0; g.len(Staggering::XFace)];
    for j in 0..g.nz {
        for i in 0..nx {
            let im = if i == 0 { nx - 1 } else { i - 1 };
            out[j * nx + i] = 0.5 * (v[j * nx + i] + v[j * nx + im]);
        }
    }
    ScalarField::from_vec(g, Staggering::XFace, out)
}

/// Average of the two cells adjacent to each z-face. Wall rows take the
/// given wall values, or the adjacent cell value when none are supplied.
pub fn center_to_zface(f: &ScalarField, walls: Option<&WallValues>) -> Result<ScalarField> {
    f.require(Staggering::Center)?;
    let g = *f.grid();
    let (nx, nz) = (g.nx, g.nz);
    let v = f.values();
    let mut out = vec![0.0; g.len(Staggering::ZFace)];
    for j in 1..nz {
        for i in 0..nx {
            out[j * nx + i] = 0.5 * (v[j * nx + i] + v[(j - 1) * nx + i]);
        }
    }
    match walls {
        Some(w) => {
            w.check(nx)?;
            out[..nx].copy_from_slice(&w.bottom);
            out[nz * nx..].copy_from_slice(&w.top);
        }
        None => {
            out[..nx].copy_from_slice(&v[..nx]);
            out[nz * nx..].copy_from_slice(&v[(nz - 1) * nx..]);
        }
    }
    ScalarField::from_vec(g, Staggering::ZFace, out)
}

pub fn xface_to_center(u: &ScalarField) -> Result<ScalarField> {
    u.require(Staggering::XFace)?;
    let g = *u.grid();
    let nx = g.nx;
    let v = u.values();
    let mut out = vec![0.0; g.len(Staggering::Center)];
    for j in 0..g.nz {
        for i in 0..nx {
            let ip = if i + 1 == nx { 0 } else { i + 1 };
            out[j * nx + i] = 0.5 * (v[j * nx + i] + v[j * nx + ip]);
        }
    }
    ScalarField::from_vec(g, Staggering::Center, out)
}

pub fn zface_to_center(w: &ScalarField) -> Result<ScalarField> {
    w.require(Staggering::ZFace)?;
    let g = *w.grid();
    let nx = g.nx;
    let v = w.values();
    let mut out = vec![0.0; g.len(Staggering::Center)];
    for j in 0..g.nz {
        for i in 0..nx {
            out[j * nx + i] = 0.5 * (v[j * nx + i] + v[(j + 1) * nx + i]);
        }
    }
    ScalarField::from_vec(g, Staggering::Center, out)
}

/// Both velocity components averaged to cell centers.
pub fn vector_at_centers(v: &VectorField) -> Result<(ScalarField, ScalarField)> {
    Ok((xface_to_center(&v.u)?, zface_to_center(&v.w)?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::Grid;
    use std::f64::consts::PI;

    fn pseudo_random(g: Grid, stag: Staggering, seed: u64) -> ScalarField {
        let mut s = seed;
        let mut f = ScalarField::zeros(g, stag);
        for v in f.values_mut() {
            s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            *v = ((s >> 11) as f64 / (1u64 << 53) as f64) - 0.5;
        }
        f
    }

    #[test]
    fn grad_of_constant_is_zero() {
        let g = Grid::unit(8, 6).unwrap();
        let f = ScalarField::constant(g, Staggering::Center, 2.5);
        assert_eq!(grad(&f).unwrap().max_abs(), 0.0);
    }

    #[test]
    fn div_grad_is_neumann_laplacian() {
        let g = Grid::new(12, 10, 1.7).unwrap();
        let f = pseudo_random(g, Staggering::Center, 7);
        let a = div(&grad(&f).unwrap()).unwrap();
        let b = laplacian(&f, &ZBc::Neumann).unwrap();
        let scale = b.max_abs();
        for (x, y) in a.values().iter().zip(b.values()) {
            assert!((x - y).abs() <= 1e-12 * scale);
        }
    }

    #[test]
    fn summation_by_parts() {
        let g = Grid::unit(16, 8).unwrap();
        let f = pseudo_random(g, Staggering::Center, 3);
        let mut v = VectorField::new(
            pseudo_random(g, Staggering::XFace, 5),
            pseudo_random(g, Staggering::ZFace, 11),
        )
        .unwrap();
        v.enforce_no_slip();
        let lhs = grad(&f).unwrap().dot(&v).unwrap();
        let rhs = -f.dot(&div(&v).unwrap()).unwrap();
        assert!((lhs - rhs).abs() < 1e-12 * lhs.abs().max(1.0));
    }

    #[test]
    fn laplacian_second_order() {
        let exact = |x: f64, z: f64| -(4.0 * PI * PI) * (2.0 * PI * x).sin() * z * (1.0 - z) - 2.0 * (2.0 * PI * x).sin();
        let mut errs = Vec::new();
        for n in [16, 32, 64] {
            let g = Grid::unit(n, n).unwrap();
            let f = ScalarField::from_fn(g, Staggering::Center, |x, z| (2.0 * PI * x).sin() * z * (1.0 - z));
            let lap = laplacian(&f, &ZBc::zero_dirichlet(n)).unwrap();
            // Interior rows: the linear ghost is first order at the wall row itself.
            let mut e: f64 = 0.0;
            for j in 1..n - 1 {
                for i in 0..n {
                    let (x, z) = g.coords(Staggering::Center, i, j);
                    e = e.max((lap.at(i, j) - exact(x, z)).abs());
                }
            }
            errs.push(e);
        }
        let r1 = (errs[0] / errs[1]).log2();
        let r2 = (errs[1] / errs[2]).log2();
        assert!(r1 > 1.9 && r2 > 1.9, "orders {r1} {r2}");
    }

    #[test]
    fn zface_laplacian_uses_wall_nodes() {
        let g = Grid::unit(8, 8).unwrap();
        let f = ScalarField::from_fn(g, Staggering::ZFace, |_, z| z * z);
        let lap = laplacian(&f, &ZBc::Dirichlet(WallValues::constant(8, 0.0, 1.0))).unwrap();
        for j in 1..8 {
            assert!((lap.at(3, j) - 2.0).abs() < 1e-10);
        }
        assert!(laplacian(&f, &ZBc::Neumann).is_err());
    }

    #[test]
    fn interpolation_roundtrip_on_linear_fields() {
        let g = Grid::unit(8, 8).unwrap();
        let f = ScalarField::from_fn(g, Staggering::Center, |_, z| 2.0 * z + 1.0);
        let zf = center_to_zface(&f, None).unwrap();
        for j in 1..8 {
            assert!((zf.at(0, j) - (2.0 * j as f64 / 8.0 + 1.0)).abs() < 1e-14);
        }
        let back = zface_to_center(&zf).unwrap();
        for j in 1..7 {
            assert!((back.at(2, j) - f.at(2, j)).abs() < 1e-14);
        }
    }
}
