use crate::error::{Error, Result};
use crate::scalar::Real;

/// Smallest grid the solver accepts.
pub const MIN_POINTS: usize = 16;

/// Lattice in the Lagrangian label `xi` with spacing `h`.
///
/// Labels where the initial slope jumps may be doubled: the two coincident
/// nodes carry the left and right limits and are joined by a zero-width
/// cell. Every other cell has width `h`.
#[derive(Debug, Clone, PartialEq)]
pub struct XiGrid<T> {
    xi: Vec<T>,
    h: T,
    splits: Vec<usize>,
}

impl<T: Real> XiGrid<T> {
    /// Uniform grid with `n >= 16` points on `[xi_min, xi_max]`.
    pub fn new(xi_min: T, xi_max: T, n: usize) -> Result<Self> {
        if n < MIN_POINTS {
            return Err(Error::BadRange(format!("need at least {MIN_POINTS} points, got {n}")));
        }
        Self::with_points(xi_min, xi_max, n)
    }

    /// Same as [`XiGrid::new`] without the minimum-size rule; used by tests and
    /// tiny diagnostic grids.
    pub fn with_points(xi_min: T, xi_max: T, n: usize) -> Result<Self> {
        if n < 2 || !(xi_min < xi_max) || !xi_min.is_finite() || !xi_max.is_finite() {
            return Err(Error::BadRange(format!("[{xi_min}, {xi_max}] with {n} points")));
        }
        let h = (xi_max - xi_min) / T::of_usize(n - 1);
        let xi = (0..n)
            .map(|i| if i == n - 1 { xi_max } else { xi_min + T::of_usize(i) * h })
            .collect();
        Ok(Self { xi, h, splits: Vec::new() })
    }

    /// Lattice of roughly `n` points covering `[xi_min, xi_max]` with every
    /// label in `anchors` (at most two) on a doubled node.
    pub fn aligned(xi_min: T, xi_max: T, n: usize, anchors: &[T]) -> Result<Self> {
        let base = Self::new(xi_min, xi_max, n)?;
        let mut anchors = anchors.to_vec();
        anchors.sort_by(|a, b| a.partial_cmp(b).expect("finite anchors"));
        anchors.dedup();
        let (a0, h) = match anchors[..] {
            [] => return Ok(base),
            [a] => (a, base.h),
            [a, b] => {
                let k = ((b - a) / base.h).round().max(T::one());
                (a, (b - a) / k)
            }
            _ => return Err(Error::BadRange(format!("can align at most two labels, got {}", anchors.len()))),
        };
        if anchors.iter().any(|&a| !(a > xi_min && a < xi_max)) {
            return Err(Error::BadRange("anchor labels must lie inside the grid".into()));
        }
        let lo = ((xi_min - a0) / h).floor().to_i64().expect("finite");
        let hi = ((xi_max - a0) / h).ceil().to_i64().expect("finite");
        let mut xi = Vec::with_capacity((hi - lo + 3) as usize);
        let mut splits = Vec::new();
        let tol = h * T::lit(1e-6);
        for m in lo..=hi {
            let mut x = a0 + T::lit(m as f64) * h;
            let hit = anchors.iter().copied().find(|&a| (x - a).abs() < tol);
            if let Some(a) = hit {
                x = a;
                xi.push(x);
                splits.push(xi.len() - 1);
            }
            xi.push(x);
        }
        if splits.len() != anchors.len() {
            return Err(Error::BadRange("anchor labels are not on one lattice".into()));
        }
        Ok(Self { xi, h, splits })
    }

    /// Rebuilds a grid from its nodes and lattice spacing, e.g. after reading
    /// a snapshot back. Equal neighbours become doubled nodes.
    pub fn from_nodes(xi: Vec<T>, h: T) -> Result<Self> {
        if xi.len() < 2 || !(h > T::zero()) || xi.iter().any(|x| !x.is_finite()) {
            return Err(Error::BadRange(format!("{} nodes with spacing {h}", xi.len())));
        }
        let mut splits = Vec::new();
        for c in 0..xi.len() - 1 {
            if xi[c + 1] < xi[c] {
                return Err(Error::BadRange(format!("labels decrease at node {c}")));
            }
            if xi[c + 1] == xi[c] {
                if splits.last() == Some(&(c.wrapping_sub(1))) {
                    return Err(Error::BadRange(format!("label repeated three times at node {c}")));
                }
                splits.push(c);
            }
        }
        Ok(Self { xi, h, splits })
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.xi.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.xi.is_empty()
    }

    /// Lattice spacing.
    #[inline]
    pub fn h(&self) -> T {
        self.h
    }

    pub fn values(&self) -> &[T] {
        &self.xi
    }

    pub fn xi_min(&self) -> T {
        self.xi[0]
    }

    pub fn xi_max(&self) -> T {
        self.xi[self.xi.len() - 1]
    }

    /// Cells `c` (between nodes `c` and `c + 1`) of zero width.
    pub fn split_cells(&self) -> &[usize] {
        &self.splits
    }

    #[inline]
    pub fn is_split_cell(&self, c: usize) -> bool {
        self.splits.binary_search(&c).is_ok()
    }

    #[inline]
    pub fn cell_width(&self, c: usize) -> T {
        if self.is_split_cell(c) {
            T::zero()
        } else {
            self.xi[c + 1] - self.xi[c]
        }
    }

    pub fn cell_widths(&self) -> Vec<T> {
        (0..self.len().saturating_sub(1)).map(|c| self.cell_width(c)).collect()
    }

    /// Maximal node ranges `[start, end)` not crossing a split.
    pub fn segments(&self) -> Vec<std::ops::Range<usize>> {
        let mut out = Vec::with_capacity(self.splits.len() + 1);
        let mut start = 0;
        for &c in &self.splits {
            out.push(start..c + 1);
            start = c + 1;
        }
        out.push(start..self.len());
        out
    }

    /// Trapezoid weight of node `i`.
    #[inline]
    pub fn weight(&self, i: usize) -> T {
        let n = self.xi.len();
        let left = if i > 0 { self.cell_width(i - 1) } else { T::zero() };
        let right = if i + 1 < n { self.cell_width(i) } else { T::zero() };
        (left + right) / T::lit(2.0)
    }

    /// Trapezoid rule for samples on this grid.
    pub fn integrate(&self, f: &[T]) -> T {
        debug_assert_eq!(f.len(), self.len());
        f.iter().enumerate().map(|(i, &v)| self.weight(i) * v).sum()
    }
}
