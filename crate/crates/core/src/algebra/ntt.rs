//! Radix-2 number-theoretic transform for polynomial products.

use crate::error::Result;

use super::field::{Fe, FieldConfig};

/// Multiply two coefficient slices by transforming to the evaluation domain,
/// multiplying pointwise, and transforming back. Inputs need not be padded.
/// Fails when the required transform length exceeds the field's two-adicity.
pub fn ntt_mul(f: &FieldConfig, a: &[Fe], b: &[Fe], out_len: usize) -> Result<Vec<Fe>> {
    let size = out_len.next_power_of_two();
    let log = size.trailing_zeros();
    let w = f.root_of_unity(log)?;
    let w_inv = f.inv(w)?;

    let mut fa = vec![Fe::ZERO; size];
    fa[..a.len()].copy_from_slice(a);
    let mut fb = vec![Fe::ZERO; size];
    fb[..b.len()].copy_from_slice(b);

    transform(f, &mut fa, w);
    transform(f, &mut fb, w);
    for (x, y) in fa.iter_mut().zip(fb.iter()) {
        *x = f.mul(*x, *y);
    }
    transform(f, &mut fa, w_inv);

    let size_inv = f.inv(f.from_u64(size as u64))?;
    fa.truncate(out_len);
    for x in fa.iter_mut() {
        *x = f.mul(*x, size_inv);
    }
    Ok(fa)
}

/// Iterative Cooley-Tukey butterfly over a power-of-two slice.
fn transform(f: &FieldConfig, data: &mut [Fe], root: Fe) {
    let n = data.len();
    if n <= 1 {
        return;
    }
    bit_reverse(data);

    // Stage m uses the primitive m-th root, root^(n/m).
    let mut m = 2;
    while m <= n {
        let wm = f.pow(root, (n / m) as u64);
        for base in (0..n).step_by(m) {
            let mut w = f.one();
            for j in 0..m / 2 {
                let t = f.mul(w, data[base + j + m / 2]);
                let u = data[base + j];
                data[base + j] = f.add(u, t);
                data[base + j + m / 2] = f.sub(u, t);
                w = f.mul(w, wm);
            }
        }
        m *= 2;
    }
}

fn bit_reverse(data: &mut [Fe]) {
    let n = data.len();
    let log_n = n.trailing_zeros();
    for i in 0..n {
        let j = i.reverse_bits() >> (usize::BITS - log_n);
        if i < j {
            data.swap(i, j);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::error::Error;

    fn schoolbook(f: &FieldConfig, a: &[Fe], b: &[Fe]) -> Vec<Fe> {
        let mut out = vec![Fe::ZERO; a.len() + b.len() - 1];
        for (i, &x) in a.iter().enumerate() {
            for (j, &y) in b.iter().enumerate() {
                out[i + j] = f.add(out[i + j], f.mul(x, y));
            }
        }
        out
    }

    #[test]
    fn matches_schoolbook() {
        let f = FieldConfig::new(998244353).unwrap();
        let mut rng = crate::rng::SplitMix64::new(3);
        for _ in 0..20 {
            let la = 1 + (rng.next_below(40) as usize);
            let lb = 1 + (rng.next_below(40) as usize);
            let a: Vec<Fe> = (0..la).map(|_| f.random_element(&mut rng)).collect();
            let b: Vec<Fe> = (0..lb).map(|_| f.random_element(&mut rng)).collect();
            let got = ntt_mul(&f, &a, &b, la + lb - 1).unwrap();
            assert_eq!(got, schoolbook(&f, &a, &b));
        }
    }

    #[test]
    fn capacity_error_names_adicity() {
        // p = 7 has two-adicity 1: transforms of length 4 are impossible.
        let f = FieldConfig::new(7).unwrap();
        let a = vec![f.one(); 3];
        let err = ntt_mul(&f, &a, &a, 5).unwrap_err();
        match err {
            Error::TransformTooLong {
                required,
                available,
                ..
            } => {
                assert!(required > available);
                assert_eq!(available, 1);
            }
            e => panic!("unexpected error {e}"),
        }
    }
}
