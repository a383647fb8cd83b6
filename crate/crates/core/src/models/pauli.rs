//! Pauli strings on up to 64 qubits as x/z bit masks.

use crate::tensorlab::{ComplexMatrix, C64};

/// ∏_k X^{x_k}Z^{z_k} up to phase, with Y on qubits where both bits are set.
/// Qubit 0 is the leftmost tensor factor.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct PauliString {
    pub n: usize,
    pub x: u64,
    pub z: u64,
}

impl PauliString {
    pub fn identity(n: usize) -> Self {
        assert!(n <= 64, "at most 64 qubits");
        Self { n, x: 0, z: 0 }
    }

    pub fn x_on(n: usize, qubits: &[usize]) -> Self {
        let mut p = Self::identity(n);
        for &q in qubits {
            assert!(q < n);
            p.x |= 1 << q;
        }
        p
    }

    pub fn z_on(n: usize, qubits: &[usize]) -> Self {
        let mut p = Self::identity(n);
        for &q in qubits {
            assert!(q < n);
            p.z |= 1 << q;
        }
        p
    }

    pub fn weight(&self) -> u32 {
        (self.x | self.z).count_ones()
    }

    pub fn commutes(&self, other: &Self) -> bool {
        ((self.x & other.z).count_ones() + (self.z & other.x).count_ones()).is_multiple_of(2)
    }

    /// Product with the phase dropped.
    pub fn times(&self, other: &Self) -> Self {
        Self { n: self.n, x: self.x ^ other.x, z: self.z ^ other.z }
    }

    /// Restriction to a subset of qubits, relabelled in the given order.
    pub fn restrict(&self, qubits: &[usize]) -> Self {
        let mut p = Self::identity(qubits.len());
        for (k, &q) in qubits.iter().enumerate() {
            p.x |= ((self.x >> q) & 1) << k;
            p.z |= ((self.z >> q) & 1) << k;
        }
        p
    }

    /// Dense Hermitian matrix, Y = [[0,−i],[i,0]].
    pub fn to_matrix(&self) -> ComplexMatrix {
        let dim = 1usize << self.n;
        let to_index = |mask: u64| -> usize {
            (0..self.n).filter(|&k| (mask >> k) & 1 == 1).map(|k| 1usize << (self.n - 1 - k)).sum()
        };
        let xi = to_index(self.x);
        let zi = to_index(self.z);
        let y_phase = match (self.x & self.z).count_ones() % 4 {
            0 => C64::new(1.0, 0.0),
            1 => C64::new(0.0, 1.0),
            2 => C64::new(-1.0, 0.0),
            _ => C64::new(0.0, -1.0),
        };
        let mut data = vec![C64::new(0.0, 0.0); dim * dim];
        for col in 0..dim {
            let row = col ^ xi;
            let sign = if (col & zi).count_ones() % 2 == 0 { 1.0 } else { -1.0 };
            data[row * dim + col] = y_phase * sign;
        }
        ComplexMatrix::new(dim, dim, data).expect("square")
    }
}

/// Rank over GF(2) of the strings as (x|z) vectors.
pub fn gf2_rank(strings: &[PauliString]) -> usize {
    let mut rows: Vec<u128> = strings.iter().map(|p| (p.x as u128) | ((p.z as u128) << 64)).collect();
    let mut rank = 0;
    for bit in 0..128 {
        let Some(pivot) = (rank..rows.len()).find(|&r| (rows[r] >> bit) & 1 == 1) else {
            continue;
        };
        rows.swap(rank, pivot);
        let p = rows[rank];
        for (r, row) in rows.iter_mut().enumerate() {
            if r != rank && (*row >> bit) & 1 == 1 {
                *row ^= p;
            }
        }
        rank += 1;
    }
    rank
}

/// Ground degeneracy 2^{n − rank} of −Σ P over commuting strings whose
/// product relations carry no −1 signs.
pub fn stabilizer_degeneracy(n: usize, strings: &[PauliString]) -> u128 {
    1u128 << (n - gf2_rank(strings))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_qubit_matrices() {
        let x = PauliString::x_on(1, &[0]).to_matrix();
        let z = PauliString::z_on(1, &[0]).to_matrix();
        let y = PauliString { n: 1, x: 1, z: 1 }.to_matrix();
        assert_eq!(x.get(0, 1), C64::new(1.0, 0.0));
        assert_eq!(z.get(1, 1), C64::new(-1.0, 0.0));
        assert_eq!(y.get(0, 1), C64::new(0.0, -1.0));
        assert_eq!(y.get(1, 0), C64::new(0.0, 1.0));
    }

    #[test]
    fn tensor_order_and_commutation() {
        let xz = PauliString { n: 2, x: 0b01, z: 0b10 };
        let x = PauliString::x_on(1, &[0]).to_matrix();
        let z = PauliString::z_on(1, &[0]).to_matrix();
        assert!(xz.to_matrix().distance(&x.kron(&z)) < 1e-15);
        let a = PauliString::x_on(3, &[0, 1]);
        let b = PauliString::z_on(3, &[1, 2]);
        let c = PauliString::z_on(3, &[0, 1]);
        assert!(!a.commutes(&b));
        assert!(a.commutes(&c));
        let (ma, mb) = (a.to_matrix(), b.to_matrix());
        assert!((&ma.matmul(&mb) + &mb.matmul(&ma)).max_abs() < 1e-15);
    }

    #[test]
    fn rank_and_degeneracy() {
        let zz = [PauliString::z_on(3, &[0, 1]), PauliString::z_on(3, &[1, 2]), PauliString::z_on(3, &[0, 2])];
        assert_eq!(gf2_rank(&zz), 2);
        assert_eq!(stabilizer_degeneracy(3, &zz), 2);
    }
}
