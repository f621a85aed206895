//! Concrete matroid families. Each independence test assumes its input is
//! strictly increasing and in range.

use smallvec::SmallVec;

use crate::error::{Error, Result};

#[derive(Debug, Clone)]
pub struct Partition {
    pub(crate) block_of: Vec<usize>,
    pub(crate) caps: Vec<usize>,
}

impl Partition {
    pub fn new(blocks: Vec<Vec<usize>>, caps: Vec<usize>) -> Result<Self> {
        if blocks.len() != caps.len() {
            return Err(Error::input_at(
                "caps",
                format!("{} caps given for {} blocks", caps.len(), blocks.len()),
            ));
        }
        let n: usize = blocks.iter().map(Vec::len).sum();
        let mut block_of = vec![usize::MAX; n];
        for (b, block) in blocks.iter().enumerate() {
            for (pos, &e) in block.iter().enumerate() {
                if e >= n {
                    return Err(Error::input_at(
                        format!("blocks[{b}][{pos}]"),
                        format!("element {e} outside ground set 0..{n} (blocks must partition it)"),
                    ));
                }
                if block_of[e] != usize::MAX {
                    return Err(Error::input_at(
                        format!("blocks[{b}][{pos}]"),
                        format!("element {e} appears in more than one block"),
                    ));
                }
                block_of[e] = b;
            }
        }
        Ok(Partition { block_of, caps })
    }

    pub fn n(&self) -> usize {
        self.block_of.len()
    }

    pub fn check(&self, set: &[usize]) -> bool {
        let mut used: SmallVec<[usize; 16]> = SmallVec::from_elem(0, self.caps.len());
        for &e in set {
            let b = self.block_of[e];
            used[b] += 1;
            if used[b] > self.caps[b] {
                return false;
            }
        }
        true
    }
}

#[derive(Debug, Clone)]
pub struct Graphic {
    pub(crate) vertices: usize,
    pub(crate) edges: Vec<(usize, usize)>,
}

impl Graphic {
    pub fn new(vertices: usize, edges: Vec<(usize, usize)>) -> Result<Self> {
        for (i, &(u, v)) in edges.iter().enumerate() {
            if u >= vertices || v >= vertices {
                return Err(Error::input_at(
                    format!("edges[{i}]"),
                    format!("endpoint out of range for {vertices} vertices"),
                ));
            }
        }
        Ok(Graphic { vertices, edges })
    }

    pub fn n(&self) -> usize {
        self.edges.len()
    }

    /// Acyclicity by union-find, rebuilt per query.
    pub fn check(&self, set: &[usize]) -> bool {
        if set.len() >= self.vertices.max(1) {
            return false;
        }
        let mut parent: SmallVec<[u32; 32]> = (0..self.vertices as u32).collect();
        fn find(parent: &mut [u32], mut x: u32) -> u32 {
            while parent[x as usize] != x {
                let up = parent[parent[x as usize] as usize];
                parent[x as usize] = up;
                x = up;
            }
            x
        }
        for &e in set {
            let (u, v) = self.edges[e];
            let ru = find(&mut parent, u as u32);
            let rv = find(&mut parent, v as u32);
            if ru == rv {
                return false;
            }
            parent[ru as usize] = rv;
        }
        true
    }
}

/// Column matroid of a matrix over the prime field GF(p).
#[derive(Debug, Clone)]
pub struct Linear {
    pub(crate) field: u64,
    pub(crate) rows: usize,
    /// Column-major entries reduced mod `field`.
    pub(crate) columns: Vec<Vec<u64>>,
}

pub(crate) fn is_prime(p: u64) -> bool {
    if p < 2 {
        return false;
    }
    let mut d = 2u64;
    while d * d <= p {
        if p % d == 0 {
            return false;
        }
        d += 1;
    }
    true
}

fn pow_mod(mut b: u64, mut e: u64, m: u64) -> u64 {
    let mut acc = 1u64;
    b %= m;
    while e > 0 {
        if e & 1 == 1 {
            acc = mul_mod(acc, b, m);
        }
        b = mul_mod(b, b, m);
        e >>= 1;
    }
    acc
}

#[inline]
fn mul_mod(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

impl Linear {
    pub fn new(field: u64, matrix: &[Vec<i64>]) -> Result<Self> {
        if !is_prime(field) {
            return Err(Error::input_at("field", format!("{field} is not prime")));
        }
        if field > u32::MAX as u64 {
            return Err(Error::input_at("field", "field order must fit in 32 bits"));
        }
        let rows = matrix.len();
        let cols = matrix.first().map_or(0, Vec::len);
        for (i, row) in matrix.iter().enumerate() {
            if row.len() != cols {
                return Err(Error::input_at(
                    format!("matrix[{i}]"),
                    format!("row has {} entries, expected {cols}", row.len()),
                ));
            }
        }
        let columns = (0..cols)
            .map(|j| matrix.iter().map(|row| row[j].rem_euclid(field as i64) as u64).collect())
            .collect();
        Ok(Linear { field, rows, columns })
    }

    pub fn n(&self) -> usize {
        self.columns.len()
    }

    /// Gaussian elimination on the selected columns.
    pub fn check(&self, set: &[usize]) -> bool {
        if set.len() > self.rows {
            return false;
        }
        let p = self.field;
        let k = set.len();
        // Rows of the k-column submatrix, stored row-major.
        let mut a: SmallVec<[u64; 64]> = SmallVec::with_capacity(self.rows * k);
        for r in 0..self.rows {
            for &c in set {
                a.push(self.columns[c][r]);
            }
        }
        let mut pivot_row = 0;
        for col in 0..k {
            let Some(found) = (pivot_row..self.rows).find(|&r| a[r * k + col] != 0) else {
                return false;
            };
            if found != pivot_row {
                for c in 0..k {
                    a.swap(found * k + c, pivot_row * k + c);
                }
            }
            let inv = pow_mod(a[pivot_row * k + col], p - 2, p);
            for r in pivot_row + 1..self.rows {
                let f = mul_mod(a[r * k + col], inv, p);
                if f == 0 {
                    continue;
                }
                for c in col..k {
                    let sub = mul_mod(f, a[pivot_row * k + c], p);
                    a[r * k + c] = (a[r * k + c] + p - sub) % p;
                }
            }
            pivot_row += 1;
        }
        true
    }
}
