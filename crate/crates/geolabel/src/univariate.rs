//! Exact univariate polynomials over the rationals: Sturm chains, root
//! counting, root isolation, and sample points between roots.

use crate::error::{Error, Result};
use crate::rat::{q, sign, Q};
use num::{One, Signed, Zero};

/// Coefficients low degree first; trailing zeros trimmed.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Poly1(pub Vec<Q>);

impl Poly1 {
    pub fn new(mut coeffs: Vec<Q>) -> Self {
        while coeffs.last().map_or(false, |c| c.is_zero()) {
            coeffs.pop();
        }
        Poly1(coeffs)
    }

    pub fn zero() -> Self {
        Poly1(Vec::new())
    }

    pub fn constant(c: Q) -> Self {
        Poly1::new(vec![c])
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_empty()
    }

    /// Degree; zero polynomial reports degree 0.
    pub fn deg(&self) -> usize {
        self.0.len().saturating_sub(1)
    }

    pub fn eval(&self, x: &Q) -> Q {
        let mut acc = Q::zero();
        for c in self.0.iter().rev() {
            acc = &acc * x + c;
        }
        acc
    }

    pub fn derivative(&self) -> Poly1 {
        if self.0.len() <= 1 {
            return Poly1::zero();
        }
        Poly1::new(
            self.0[1..]
                .iter()
                .enumerate()
                .map(|(i, c)| c * q(i as i64 + 1))
                .collect(),
        )
    }

    pub fn mul(&self, other: &Poly1) -> Poly1 {
        if self.is_zero() || other.is_zero() {
            return Poly1::zero();
        }
        let mut out = vec![Q::zero(); self.0.len() + other.0.len() - 1];
        for (i, a) in self.0.iter().enumerate() {
            for (j, b) in other.0.iter().enumerate() {
                out[i + j] = &out[i + j] + &(a * b);
            }
        }
        Poly1::new(out)
    }

    /// Euclidean remainder of self by divisor (exact over Q).
    pub fn rem(&self, divisor: &Poly1) -> Result<Poly1> {
        if divisor.is_zero() {
            return Err(Error::arg("polynomial division by zero"));
        }
        let mut r = self.0.clone();
        let d = divisor.0.len();
        let lead = divisor.0.last().unwrap();
        while r.len() >= d && !r.is_empty() {
            let c = r.last().unwrap() / lead;
            if c.is_zero() {
                r.pop();
                continue;
            }
            let shift = r.len() - d;
            for (i, b) in divisor.0.iter().enumerate() {
                r[shift + i] = &r[shift + i] - &(&c * b);
            }
            // leading term cancels exactly
            r.pop();
            while r.last().map_or(false, |x| x.is_zero()) {
                r.pop();
            }
        }
        Ok(Poly1::new(r))
    }

    /// Monic gcd.
    pub fn gcd(&self, other: &Poly1) -> Result<Poly1> {
        let (mut a, mut b) = (self.clone(), other.clone());
        while !b.is_zero() {
            let r = a.rem(&b)?;
            a = b;
            b = r;
        }
        if let Some(lead) = a.0.last().cloned() {
            if !lead.is_one() {
                for c in &mut a.0 {
                    *c = &*c / &lead;
                }
            }
        }
        Ok(a)
    }

    /// Exact quotient; errors if the division leaves a remainder.
    pub fn div_exact(&self, divisor: &Poly1) -> Result<Poly1> {
        if divisor.is_zero() {
            return Err(Error::arg("polynomial division by zero"));
        }
        let mut r = self.0.clone();
        let d = divisor.0.len();
        let lead = divisor.0.last().unwrap();
        let mut quot = vec![Q::zero(); r.len().saturating_sub(d) + 1];
        while r.len() >= d && !r.is_empty() {
            let c = r.last().unwrap() / lead;
            let shift = r.len() - d;
            quot[shift] = c.clone();
            for (i, b) in divisor.0.iter().enumerate() {
                r[shift + i] = &r[shift + i] - &(&c * b);
            }
            r.pop();
            while r.last().map_or(false, |x| x.is_zero()) {
                r.pop();
            }
        }
        if !r.is_empty() {
            return Err(Error::arg("inexact polynomial division"));
        }
        Ok(Poly1::new(quot))
    }

    /// Squarefree part: self / gcd(self, self').
    pub fn squarefree(&self) -> Result<Poly1> {
        if self.0.len() <= 1 {
            return Ok(self.clone());
        }
        let g = self.gcd(&self.derivative())?;
        if g.0.len() <= 1 {
            return Ok(self.clone());
        }
        self.div_exact(&g)
    }

    /// Cauchy root bound: all real roots lie in (-bound, bound).
    pub fn root_bound(&self) -> Q {
        if self.0.len() <= 1 {
            return Q::one();
        }
        let lead = self.0.last().unwrap();
        let mut m = Q::zero();
        for c in &self.0[..self.0.len() - 1] {
            let a = (c / lead).abs();
            if a > m {
                m = a;
            }
        }
        m + Q::one()
    }
}

/// Sturm chain of a squarefree polynomial.
pub struct Sturm {
    chain: Vec<Poly1>,
}

impl Sturm {
    pub fn new(p: &Poly1) -> Result<Sturm> {
        if p.is_zero() {
            return Err(Error::arg("Sturm chain of the zero polynomial"));
        }
        let mut chain = vec![p.clone()];
        let dp = p.derivative();
        if !dp.is_zero() {
            chain.push(dp);
            loop {
                let k = chain.len();
                let r = chain[k - 2].rem(&chain[k - 1])?;
                if r.is_zero() {
                    break;
                }
                chain.push(Poly1::new(r.0.into_iter().map(|c| -c).collect()));
            }
        }
        Ok(Sturm { chain })
    }

    fn variations(&self, x: &Q) -> usize {
        let mut count = 0;
        let mut last = 0i32;
        for p in &self.chain {
            let s = sign(&p.eval(x));
            if s != 0 {
                if last != 0 && s != last {
                    count += 1;
                }
                last = s;
            }
        }
        count
    }

    /// Number of distinct roots in the open interval (a, b); both endpoints
    /// must be non-roots.
    pub fn count_roots(&self, a: &Q, b: &Q) -> Result<usize> {
        if a >= b {
            return Err(Error::arg("empty interval"));
        }
        let p = &self.chain[0];
        if p.eval(a).is_zero() || p.eval(b).is_zero() {
            return Err(Error::arg("interval endpoint is a root"));
        }
        Ok(self.variations(a) - self.variations(b))
    }
}

/// Isolates the distinct real roots of a squarefree `p` inside (lo, hi) into
/// disjoint open intervals with non-root rational endpoints, sorted.
pub fn isolate_roots(p: &Poly1, lo: &Q, hi: &Q) -> Result<Vec<(Q, Q)>> {
    let sturm = Sturm::new(p)?;
    let two = q(2);
    // nudge endpoints off roots
    let mut lo = lo.clone();
    let mut hi = hi.clone();
    let width = &hi - &lo;
    if width <= Q::zero() {
        return Err(Error::arg("empty interval"));
    }
    let mut eps = &width / q(1 << 20);
    while p.eval(&lo).is_zero() {
        lo = &lo - &eps;
        eps = &eps / &two;
    }
    while p.eval(&hi).is_zero() {
        hi = &hi + &eps;
        eps = &eps / &two;
    }
    let mut out = Vec::new();
    let total = sturm.count_roots(&lo, &hi)?;
    if total == 0 {
        return Ok(out);
    }
    let mut stack = vec![(lo, hi, total)];
    while let Some((a, b, cnt)) = stack.pop() {
        if cnt == 1 {
            out.push((a, b));
            continue;
        }
        let mut mid = (&a + &b) / &two;
        let mut step = (&b - &a) / q(64);
        while p.eval(&mid).is_zero() {
            mid = &mid + &step;
            step = &step / &two;
        }
        let left = sturm.count_roots(&a, &mid)?;
        if left > 0 {
            stack.push((a, mid.clone(), left));
        }
        if cnt - left > 0 {
            stack.push((mid, b, cnt - left));
        }
    }
    out.sort_by(|x, y| x.0.cmp(&y.0));
    Ok(out)
}

/// One rational sample inside every maximal root-free open subinterval of
/// (lo, hi) with respect to the roots of squarefree `p`.
pub fn gap_samples(p: &Poly1, lo: &Q, hi: &Q) -> Result<Vec<Q>> {
    let ivs = isolate_roots(p, lo, hi)?;
    if ivs.is_empty() {
        return Ok(vec![(lo + hi) / q(2)]);
    }
    // interval endpoints are non-roots; bisection keeps them disjoint, so
    // l_1 precedes every root and each r_j sits between roots j and j+1
    let mut out = vec![ivs[0].0.clone()];
    for (_, r) in &ivs {
        out.push(r.clone());
    }
    Ok(out)
}

struct RootIv {
    poly: Poly1, // squarefree; sign change across (a, b)
    a: Q,
    b: Q,
}

impl RootIv {
    /// Halves the isolating interval, keeping endpoints off the root.
    fn refine(&mut self) {
        let two = q(2);
        let mut mid = (&self.a + &self.b) / &two;
        let mut step = (&self.b - &self.a) / q(64);
        while self.poly.eval(&mid).is_zero() {
            mid = &mid + &step;
            step = &step / &two;
        }
        if sign(&self.poly.eval(&self.a)) * sign(&self.poly.eval(&mid)) < 0 {
            self.b = mid;
        } else {
            self.a = mid;
        }
    }

    fn overlaps(&self, other: &RootIv) -> bool {
        self.a < other.b && other.a < self.b
    }
}

/// One rational sample in every maximal open interval free of roots of all
/// the given (nonzero) polynomials. Exact: shared roots across polynomials
/// are detected through gcds.
pub fn multi_gap_samples(polys: &[&Poly1]) -> Result<Vec<Q>> {
    let mut roots: Vec<RootIv> = Vec::new();
    for p in polys {
        if p.is_zero() {
            return Err(Error::arg("zero polynomial in gap sampling"));
        }
        if p.deg() == 0 {
            continue;
        }
        let sf = p.squarefree()?;
        let bound = sf.root_bound() + Q::one();
        for (a, b) in isolate_roots(&sf, &(-&bound), &bound)? {
            roots.push(RootIv {
                poly: sf.clone(),
                a,
                b,
            });
        }
    }
    if roots.is_empty() {
        return Ok(vec![Q::zero()]);
    }
    roots.sort_by(|x, y| x.a.cmp(&y.a));
    // make the isolating intervals pairwise disjoint, merging intervals that
    // isolate the same algebraic number
    let mut i = 0;
    while i + 1 < roots.len() {
        if !roots[i].overlaps(&roots[i + 1]) {
            i += 1;
            continue;
        }
        let g = roots[i].poly.gcd(&roots[i + 1].poly)?;
        let same = if g.deg() >= 1 {
            let lo = if roots[i].a > roots[i + 1].a {
                roots[i].a.clone()
            } else {
                roots[i + 1].a.clone()
            };
            let hi = if roots[i].b < roots[i + 1].b {
                roots[i].b.clone()
            } else {
                roots[i + 1].b.clone()
            };
            // intersection endpoints are non-roots of g (g divides both)
            lo < hi && Sturm::new(&g)?.count_roots(&lo, &hi)? >= 1
        } else {
            false
        };
        if same {
            let iv = roots.remove(i + 1);
            if iv.a > roots[i].a {
                roots[i].a = iv.a;
            }
            if iv.b < roots[i].b {
                roots[i].b = iv.b;
            }
        } else {
            roots[i].refine();
            roots[i + 1].refine();
            roots.sort_by(|x, y| x.a.cmp(&y.a));
            if i > 0 {
                i -= 1; // refinement may have re-exposed the previous pair
            }
        }
    }
    // endpoints now lie strictly outside every isolating interval, hence are
    // non-roots of every polynomial
    let mut out = vec![roots[0].a.clone()];
    for r in &roots {
        out.push(r.b.clone());
    }
    Ok(out)
}
