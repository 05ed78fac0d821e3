//! Rectangular parameter grids and the finite-difference stencils used on them.

use std::fmt;
use std::ops::{Add, Mul, Sub};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Grid node, `i` along `u` and `j` along `v`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Node {
    pub i: usize,
    pub j: usize,
}

impl Node {
    pub fn new(i: usize, j: usize) -> Self {
        Self { i, j }
    }
}

impl fmt::Display for Node {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(i={}, j={})", self.i, self.j)
    }
}

/// A tensor-product grid on `[u_min, u_max] x [v_min, v_max]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ParameterGrid {
    pub u_min: f64,
    pub u_max: f64,
    pub v_min: f64,
    pub v_max: f64,
    pub nu: usize,
    pub nv: usize,
}

impl ParameterGrid {
    pub fn new(u_min: f64, u_max: f64, v_min: f64, v_max: f64, nu: usize, nv: usize) -> Result<Self> {
        if nu < 3 || nv < 3 {
            return Err(Error::Structural(format!("grid needs at least 3x3 nodes, got {nu}x{nv}")));
        }
        let finite = [u_min, u_max, v_min, v_max].iter().all(|x| x.is_finite());
        if !finite || !(u_max > u_min) || !(v_max > v_min) {
            return Err(Error::Structural(format!(
                "invalid grid bounds [{u_min}, {u_max}] x [{v_min}, {v_max}]"
            )));
        }
        Ok(Self { u_min, u_max, v_min, v_max, nu, nv })
    }

    /// Grid on `[u_min, u_max] x [v_min, v_max]` with spacing as close to `h` as
    /// the interval lengths allow.
    pub fn with_spacing(u_min: f64, u_max: f64, v_min: f64, v_max: f64, h: f64) -> Result<Self> {
        if !(h > 0.0) {
            return Err(Error::Structural(format!("grid spacing must be positive, got {h}")));
        }
        let nu = ((u_max - u_min) / h).round() as usize + 1;
        let nv = ((v_max - v_min) / h).round() as usize + 1;
        Self::new(u_min, u_max, v_min, v_max, nu, nv)
    }

    /// Square grid `[-half, half]^2` with spacing close to `h`.
    pub fn centered(half: f64, h: f64) -> Result<Self> {
        Self::with_spacing(-half, half, -half, half, h)
    }

    pub fn hu(&self) -> f64 {
        (self.u_max - self.u_min) / (self.nu - 1) as f64
    }

    pub fn hv(&self) -> f64 {
        (self.v_max - self.v_min) / (self.nv - 1) as f64
    }

    /// Larger of the two spacings.
    pub fn h(&self) -> f64 {
        self.hu().max(self.hv())
    }

    pub fn u(&self, i: usize) -> f64 {
        if i + 1 == self.nu {
            self.u_max
        } else {
            self.u_min + i as f64 * self.hu()
        }
    }

    pub fn v(&self, j: usize) -> f64 {
        if j + 1 == self.nv {
            self.v_max
        } else {
            self.v_min + j as f64 * self.hv()
        }
    }

    pub fn coords(&self, node: Node) -> (f64, f64) {
        (self.u(node.i), self.v(node.j))
    }

    pub fn len(&self) -> usize {
        self.nu * self.nv
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Flat index, row-major with `u` as the slow index.
    pub fn index(&self, node: Node) -> usize {
        node.i * self.nv + node.j
    }

    pub fn node(&self, index: usize) -> Node {
        Node::new(index / self.nv, index % self.nv)
    }

    pub fn contains(&self, node: Node) -> bool {
        node.i < self.nu && node.j < self.nv
    }

    pub fn is_interior(&self, node: Node) -> bool {
        node.i > 0 && node.j > 0 && node.i + 1 < self.nu && node.j + 1 < self.nv
    }

    pub fn nodes(&self) -> impl Iterator<Item = Node> + '_ {
        (0..self.nu).flat_map(move |i| (0..self.nv).map(move |j| Node::new(i, j)))
    }

    pub fn interior_nodes(&self) -> impl Iterator<Item = Node> + '_ {
        (1..self.nu - 1).flat_map(move |i| (1..self.nv - 1).map(move |j| Node::new(i, j)))
    }

    pub fn center(&self) -> Node {
        Node::new(self.nu / 2, self.nv / 2)
    }

    /// Euclidean diameter of the parameter rectangle.
    pub fn diameter(&self) -> f64 {
        (self.u_max - self.u_min).hypot(self.v_max - self.v_min)
    }

    pub fn check_node(&self, node: Node) -> Result<()> {
        if !self.contains(node) {
            return Err(Error::Structural(format!(
                "node {node} outside a {}x{} grid",
                self.nu, self.nv
            )));
        }
        Ok(())
    }

    /// Same rectangle with the spacing halved.
    pub fn refined(&self) -> Self {
        Self { nu: 2 * self.nu - 1, nv: 2 * self.nv - 1, ..*self }
    }
}

/// Anything that can be combined linearly by the stencils.
pub trait Linear: Copy + Add<Output = Self> + Sub<Output = Self> + Mul<f64, Output = Self> {}

impl<T> Linear for T where T: Copy + Add<Output = T> + Sub<Output = T> + Mul<f64, Output = T> {}

/// First difference of samples `f(k)` at position `k` of `0..len`: central in
/// the interior, second-order one-sided at the ends.
pub fn diff1<T: Linear>(f: impl Fn(usize) -> T, k: usize, len: usize, h: f64) -> T {
    let inv = 1.0 / (2.0 * h);
    if k == 0 {
        (f(1) * 4.0 - f(0) * 3.0 - f(2)) * inv
    } else if k + 1 == len {
        (f(k) * 3.0 - f(k - 1) * 4.0 + f(k - 2)) * inv
    } else {
        (f(k + 1) - f(k - 1)) * inv
    }
}

/// Second difference; one-sided (second order) at the ends.
pub fn diff2<T: Linear>(f: impl Fn(usize) -> T, k: usize, len: usize, h: f64) -> T {
    let inv = 1.0 / (h * h);
    if k == 0 {
        (f(0) * 2.0 - f(1) * 5.0 + f(2) * 4.0 - f(3)) * inv
    } else if k + 1 == len {
        (f(k) * 2.0 - f(k - 1) * 5.0 + f(k - 2) * 4.0 - f(k - 3)) * inv
    } else {
        (f(k + 1) - f(k) * 2.0 + f(k - 1)) * inv
    }
}

/// `∂_u` of a per-node field.
pub fn diff_u<T: Linear>(values: &[T], grid: &ParameterGrid, node: Node) -> T {
    diff1(|i| values[grid.index(Node::new(i, node.j))], node.i, grid.nu, grid.hu())
}

/// `∂_v` of a per-node field.
pub fn diff_v<T: Linear>(values: &[T], grid: &ParameterGrid, node: Node) -> T {
    diff1(|j| values[grid.index(Node::new(node.i, j))], node.j, grid.nv, grid.hv())
}

pub fn diff_uu<T: Linear>(values: &[T], grid: &ParameterGrid, node: Node) -> T {
    diff2(|i| values[grid.index(Node::new(i, node.j))], node.i, grid.nu, grid.hu())
}

pub fn diff_vv<T: Linear>(values: &[T], grid: &ParameterGrid, node: Node) -> T {
    diff2(|j| values[grid.index(Node::new(node.i, j))], node.j, grid.nv, grid.hv())
}

/// Mixed derivative `∂_u ∂_v` as the `u`-difference of `v`-differences.
pub fn diff_uv<T: Linear>(values: &[T], grid: &ParameterGrid, node: Node) -> T {
    diff1(
        |i| diff_v(values, grid, Node::new(i, node.j)),
        node.i,
        grid.nu,
        grid.hu(),
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_geometry() {
        let g = ParameterGrid::centered(0.5, 0.01).unwrap();
        assert_eq!((g.nu, g.nv), (101, 101));
        assert!((g.hu() - 0.01).abs() < 1e-15);
        assert_eq!(g.u(100), 0.5);
        assert_eq!(g.center(), Node::new(50, 50));
        assert_eq!(g.node(g.index(Node::new(7, 3))), Node::new(7, 3));
        assert!(ParameterGrid::new(0.0, 1.0, 0.0, 1.0, 2, 5).is_err());
        assert!(ParameterGrid::new(1.0, 0.0, 0.0, 1.0, 3, 5).is_err());
        assert_eq!(g.refined().hu(), g.hu() / 2.0);
    }

    #[test]
    fn stencils_are_exact_on_quadratics() {
        let g = ParameterGrid::new(-1.0, 2.0, 0.0, 1.0, 7, 5).unwrap();
        let f: Vec<f64> = g
            .nodes()
            .map(|n| {
                let (u, v) = g.coords(n);
                3.0 * u * u - 2.0 * u * v + v * v + u
            })
            .collect();
        for n in g.nodes() {
            let (u, v) = g.coords(n);
            assert!((diff_u(&f, &g, n) - (6.0 * u - 2.0 * v + 1.0)).abs() < 1e-12);
            assert!((diff_v(&f, &g, n) - (-2.0 * u + 2.0 * v)).abs() < 1e-12);
            assert!((diff_uu(&f, &g, n) - 6.0).abs() < 1e-10);
            assert!((diff_vv(&f, &g, n) - 2.0).abs() < 1e-10);
            assert!((diff_uv(&f, &g, n) + 2.0).abs() < 1e-11);
        }
    }
}
