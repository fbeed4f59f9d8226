//! Finite unions of closed intervals on the real line.

/// Sorted, pairwise disjoint intervals `[lo, hi]` with `lo < hi`. Endpoints
/// may be infinite (complements of bounded sets).
#[derive(Clone, Debug, Default, PartialEq)]
pub struct IntervalSet {
    spans: Vec<(f64, f64)>,
}

impl IntervalSet {
    pub fn empty() -> Self {
        Self { spans: Vec::new() }
    }

    pub fn single(lo: f64, hi: f64) -> Self {
        if lo < hi {
            Self {
                spans: vec![(lo, hi)],
            }
        } else {
            Self::empty()
        }
    }

    /// Builds a set from arbitrary (possibly overlapping, unsorted) intervals.
    pub fn from_spans(mut raw: Vec<(f64, f64)>) -> Self {
        raw.retain(|&(a, b)| a < b);
        raw.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut spans: Vec<(f64, f64)> = Vec::with_capacity(raw.len());
        for (a, b) in raw {
            match spans.last_mut() {
                Some(last) if a <= last.1 => last.1 = last.1.max(b),
                _ => spans.push((a, b)),
            }
        }
        Self { spans }
    }

    pub fn spans(&self) -> &[(f64, f64)] {
        &self.spans
    }

    pub fn is_empty(&self) -> bool {
        self.spans.is_empty()
    }

    pub fn total_length(&self) -> f64 {
        self.spans.iter().map(|(a, b)| b - a).sum()
    }

    pub fn contains(&self, t: f64) -> bool {
        self.spans.iter().any(|&(a, b)| a <= t && t <= b)
    }

    pub fn union(&self, other: &Self) -> Self {
        let mut all = self.spans.clone();
        all.extend_from_slice(&other.spans);
        Self::from_spans(all)
    }

    pub fn intersect(&self, other: &Self) -> Self {
        let mut out = Vec::new();
        let (mut i, mut j) = (0, 0);
        while i < self.spans.len() && j < other.spans.len() {
            let (a0, a1) = self.spans[i];
            let (b0, b1) = other.spans[j];
            let lo = a0.max(b0);
            let hi = a1.min(b1);
            if lo < hi {
                out.push((lo, hi));
            }
            if a1 < b1 {
                i += 1;
            } else {
                j += 1;
            }
        }
        Self { spans: out }
    }

    /// Complement within the whole real line.
    pub fn complement(&self) -> Self {
        let mut out = Vec::with_capacity(self.spans.len() + 1);
        let mut cursor = f64::NEG_INFINITY;
        for &(a, b) in &self.spans {
            if cursor < a {
                out.push((cursor, a));
            }
            cursor = b;
        }
        if cursor < f64::INFINITY {
            out.push((cursor, f64::INFINITY));
        }
        Self { spans: out }
    }

    /// Restriction to `[lo, hi]`.
    pub fn clip(&self, lo: f64, hi: f64) -> Self {
        self.intersect(&Self::single(lo, hi))
    }
}
