//! Planar link patterns: non-crossing perfect matchings of `{1, ..., 2N}`.
//!
//! Indices are 1-based throughout, so that a pattern reads the same way it
//! is written in text (`2;1-4,2-3`). Conversion to 0-based positions
//! happens only where patterns index into arrays.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

/// Largest `N` accepted by [`enumerate_patterns`].
pub const MAX_ENUMERATION_LINKS: usize = 12;

/// A planar pair partition of `{1, ..., 2N}` in canonical form: every link
/// is stored as `(a, b)` with `a < b`, and links are sorted by `a`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct LinkPattern {
    links: Vec<(usize, usize)>,
}

impl LinkPattern {
    /// Builds a pattern from an arbitrary perfect matching, normalizing the
    /// order of each pair and of the list. Crossing links are rejected.
    pub fn from_pairs(pairs: &[(usize, usize)]) -> Result<Self> {
        pattern_of_matching(pairs)
    }

    pub fn n_links(&self) -> usize {
        self.links.len()
    }

    pub fn links(&self) -> &[(usize, usize)] {
        &self.links
    }

    /// Partner of index `i` (1-based).
    pub fn partner(&self, i: usize) -> Option<usize> {
        self.links.iter().find_map(|&(a, b)| {
            if a == i {
                Some(b)
            } else if b == i {
                Some(a)
            } else {
                None
            }
        })
    }

    pub fn contains(&self, link: (usize, usize)) -> bool {
        let key = ordered(link);
        self.links.iter().any(|&l| l == key)
    }

    /// Position of `link` in the canonical list.
    pub fn index_of(&self, link: (usize, usize)) -> Option<usize> {
        let key = ordered(link);
        self.links.iter().position(|&l| l == key)
    }

    /// Removes `link` and relabels the remaining indices to `{1, ..., 2N-2}`
    /// preserving their order.
    pub fn remove_link(&self, link: (usize, usize)) -> Result<LinkPattern> {
        let (a, b) = ordered(link);
        if !self.contains((a, b)) {
            return Err(Error::invalid(format!("link {a}-{b} is not in pattern {self}")));
        }
        let relabel = |i: usize| i - usize::from(i > a) - usize::from(i > b);
        let links = self
            .links
            .iter()
            .filter(|&&l| l != (a, b))
            .map(|&(x, y)| (relabel(x), relabel(y)))
            .collect::<Vec<_>>();
        Ok(LinkPattern::canonical(links))
    }

    /// Inserts a nearest-neighbour link `{pos, pos+1}`, shifting the indices
    /// at or above `pos` up by two. `pos` ranges over `1..=2N+1`.
    pub fn insert_link(&self, pos: usize) -> Result<LinkPattern> {
        let n2 = 2 * self.n_links();
        if pos == 0 || pos > n2 + 1 {
            return Err(Error::bounds("insertion position", pos as f64, "1..=2N+1"));
        }
        let shift = |i: usize| if i >= pos { i + 2 } else { i };
        let mut links: Vec<_> = self.links.iter().map(|&(a, b)| (shift(a), shift(b))).collect();
        links.push((pos, pos + 1));
        Ok(LinkPattern::canonical(links))
    }

    /// Relabels indices by the cyclic shift `i -> i + offset (mod 2N)`.
    pub fn rotate(&self, offset: usize) -> LinkPattern {
        let n2 = 2 * self.n_links();
        let f = |i: usize| (i - 1 + offset) % n2 + 1;
        LinkPattern::canonical(self.links.iter().map(|&(a, b)| ordered((f(a), f(b)))).collect())
    }

    /// Relabels indices by the reflection `i -> 2N + 1 - i`.
    pub fn mirror(&self) -> LinkPattern {
        let n2 = 2 * self.n_links();
        LinkPattern::canonical(
            self.links
                .iter()
                .map(|&(a, b)| ordered((n2 + 1 - a, n2 + 1 - b)))
                .collect(),
        )
    }

    fn canonical(mut links: Vec<(usize, usize)>) -> LinkPattern {
        for l in links.iter_mut() {
            *l = ordered(*l);
        }
        links.sort_unstable();
        LinkPattern { links }
    }
}

fn ordered((a, b): (usize, usize)) -> (usize, usize) {
    if a <= b {
        (a, b)
    } else {
        (b, a)
    }
}

fn crosses((a, b): (usize, usize), (c, d): (usize, usize)) -> bool {
    (a < c && c < b && b < d) || (c < a && a < d && d < b)
}

/// Canonicalizes a perfect matching of `{1, ..., 2N}` into a link pattern.
pub fn pattern_of_matching(pairs: &[(usize, usize)]) -> Result<LinkPattern> {
    let n2 = 2 * pairs.len();
    if pairs.is_empty() {
        return Err(Error::invalid("empty matching"));
    }
    let mut seen = vec![false; n2 + 1];
    for &(a, b) in pairs {
        for i in [a, b] {
            if i == 0 || i > n2 {
                return Err(Error::invalid(format!("index {i} outside 1..={n2}")));
            }
            if seen[i] {
                return Err(Error::invalid(format!("index {i} used twice")));
            }
            seen[i] = true;
        }
    }
    let pattern = LinkPattern::canonical(pairs.to_vec());
    for (i, &l) in pattern.links.iter().enumerate() {
        for &m in &pattern.links[i + 1..] {
            if crosses(l, m) {
                return Err(Error::NonPlanar(l, m));
            }
        }
    }
    Ok(pattern)
}

/// All planar link patterns with `n` links, sorted lexicographically.
///
/// Patterns are generated from balanced open/close sequences (Dyck words):
/// each close matches the most recent unmatched open.
pub fn enumerate_patterns(n: usize) -> Result<Vec<LinkPattern>> {
    if n == 0 || n > MAX_ENUMERATION_LINKS {
        return Err(Error::bounds("N", n as f64, "1..=12"));
    }
    let mut out = Vec::new();
    let mut stack = Vec::with_capacity(n);
    let mut links = Vec::with_capacity(n);
    dyck(n, 1, 0, &mut stack, &mut links, &mut out);
    out.sort();
    Ok(out)
}

fn dyck(
    n: usize,
    pos: usize,
    opened: usize,
    stack: &mut Vec<usize>,
    links: &mut Vec<(usize, usize)>,
    out: &mut Vec<LinkPattern>,
) {
    if pos > 2 * n {
        out.push(LinkPattern::canonical(links.clone()));
        return;
    }
    if opened < n {
        stack.push(pos);
        dyck(n, pos + 1, opened + 1, stack, links, out);
        stack.pop();
    }
    if let Some(a) = stack.pop() {
        links.push((a, pos));
        dyck(n, pos + 1, opened, stack, links, out);
        links.pop();
        stack.push(a);
    }
}

/// Catalan number `C_n`, exact for `n <= 35`.
pub fn catalan(n: usize) -> u64 {
    let mut c: u64 = 1;
    for k in 0..n as u64 {
        // C_{k+1} = C_k * 2(2k+1) / (k+2), exact at every step.
        c = c * 2 * (2 * k + 1) / (k + 2);
    }
    c
}

impl fmt::Display for LinkPattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{};", self.n_links())?;
        for (i, (a, b)) in self.links.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{a}-{b}")?;
        }
        Ok(())
    }
}

impl FromStr for LinkPattern {
    type Err = Error;

    /// Parses `N;a1-b1,a2-b2,...`.
    fn from_str(s: &str) -> Result<Self> {
        let (count, body) = s
            .trim()
            .split_once(';')
            .ok_or_else(|| Error::invalid(format!("pattern '{s}' lacks ';'")))?;
        let n: usize = count
            .trim()
            .parse()
            .map_err(|_| Error::invalid(format!("bad link count in '{s}'")))?;
        let mut pairs = Vec::with_capacity(n);
        for item in body.split(',').filter(|t| !t.trim().is_empty()) {
            let (a, b) = item
                .trim()
                .split_once('-')
                .ok_or_else(|| Error::invalid(format!("bad link '{item}'")))?;
            let a = a.trim().parse().map_err(|_| Error::invalid(format!("bad index in '{item}'")))?;
            let b = b.trim().parse().map_err(|_| Error::invalid(format!("bad index in '{item}'")))?;
            pairs.push((a, b));
        }
        if pairs.len() != n {
            return Err(Error::invalid(format!("'{s}' declares {n} links but lists {}", pairs.len())));
        }
        pattern_of_matching(&pairs)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    /// Every perfect matching of {1..2n}, planar or not.
    fn all_matchings(n: usize) -> Vec<Vec<(usize, usize)>> {
        fn rec(free: &mut Vec<usize>, cur: &mut Vec<(usize, usize)>, out: &mut Vec<Vec<(usize, usize)>>) {
            if free.is_empty() {
                out.push(cur.clone());
                return;
            }
            let a = free.remove(0);
            for k in 0..free.len() {
                let b = free.remove(k);
                cur.push((a, b));
                rec(free, cur, out);
                cur.pop();
                free.insert(k, b);
            }
            free.insert(0, a);
        }
        let mut out = Vec::new();
        rec(&mut (1..=2 * n).collect(), &mut Vec::new(), &mut out);
        out
    }

    #[test]
    fn single_link() {
        let p = enumerate_patterns(1).unwrap();
        assert_eq!(p, vec![LinkPattern::from_pairs(&[(1, 2)]).unwrap()]);
    }

    #[test]
    fn counts_match_brute_force_filter() {
        for n in 1..=5 {
            let brute = all_matchings(n)
                .into_iter()
                .filter(|m| pattern_of_matching(m).is_ok())
                .count();
            assert_eq!(enumerate_patterns(n).unwrap().len(), brute, "n = {n}");
        }
        assert_eq!(all_matchings(3).len(), 15);
        assert_eq!(enumerate_patterns(3).unwrap().len(), 5);
        assert_eq!(enumerate_patterns(4).unwrap().len(), 14);
    }

    #[test]
    fn counts_match_catalan_recurrence() {
        // C_0 = 1, C_{n+1} = sum_i C_i C_{n-i}
        let mut c = vec![1u64];
        for n in 0..8 {
            let next = (0..=n).map(|i| c[i] * c[n - i]).sum();
            c.push(next);
        }
        for n in 1..=8 {
            assert_eq!(enumerate_patterns(n).unwrap().len() as u64, c[n]);
            assert_eq!(catalan(n), c[n]);
        }
    }

    #[test]
    fn enumeration_is_sorted_and_planar() {
        let pats = enumerate_patterns(5).unwrap();
        assert!(pats.windows(2).all(|w| w[0] < w[1]));
        for p in &pats {
            assert_eq!(pattern_of_matching(p.links()).unwrap(), *p);
        }
    }

    #[test]
    fn enumeration_bounds() {
        assert!(matches!(enumerate_patterns(0), Err(Error::Bounds { .. })));
        assert!(matches!(enumerate_patterns(13), Err(Error::Bounds { .. })));
    }

    #[test]
    fn remove_link_examples() {
        let a: LinkPattern = "2;1-2,3-4".parse().unwrap();
        assert_eq!(a.remove_link((1, 2)).unwrap().to_string(), "1;1-2");
        let b: LinkPattern = "2;1-4,2-3".parse().unwrap();
        assert_eq!(b.remove_link((2, 3)).unwrap().to_string(), "1;1-2");
        assert!(matches!(a.remove_link((1, 3)), Err(Error::InvalidArgument(_))));
    }

    #[test]
    fn matching_examples() {
        assert_eq!(pattern_of_matching(&[(2, 1)]).unwrap().to_string(), "1;1-2");
        assert!(matches!(pattern_of_matching(&[(1, 3), (2, 4)]), Err(Error::NonPlanar(..))));
        assert_eq!(
            pattern_of_matching(&[(1, 6), (2, 3), (4, 5)]).unwrap().to_string(),
            "3;1-6,2-3,4-5"
        );
        assert!(matches!(pattern_of_matching(&[(1, 2), (2, 3)]), Err(Error::InvalidArgument(_))));
        assert!(matches!(pattern_of_matching(&[(1, 5)]), Err(Error::InvalidArgument(_))));
    }

    #[test]
    fn every_nonplanar_matching_rejected() {
        let planar = enumerate_patterns(4).unwrap();
        for m in all_matchings(4) {
            let canon = LinkPattern::canonical(m.clone());
            let is_planar = planar.contains(&canon);
            assert_eq!(pattern_of_matching(&m).is_ok(), is_planar);
        }
    }

    #[test]
    fn text_round_trip() {
        for p in enumerate_patterns(4).unwrap() {
            let s = p.to_string();
            assert_eq!(s.parse::<LinkPattern>().unwrap(), p);
        }
        assert!("2;1-2".parse::<LinkPattern>().is_err());
        assert!("x".parse::<LinkPattern>().is_err());
    }

    #[test]
    fn rotation_and_mirror_preserve_planarity() {
        for p in enumerate_patterns(4).unwrap() {
            for r in 0..8 {
                let q = p.rotate(r);
                assert!(pattern_of_matching(q.links()).is_ok());
            }
            assert_eq!(p.mirror().mirror(), p);
            assert_eq!(p.rotate(8), p);
        }
    }

    proptest! {
        #[test]
        fn insert_then_remove_is_identity(n in 1usize..6, which in 0usize..1000, pos_seed in 0usize..1000) {
            let pats = enumerate_patterns(n).unwrap();
            let alpha = &pats[which % pats.len()];
            let pos = 1 + pos_seed % (2 * n + 1);
            let bigger = alpha.insert_link(pos).unwrap();
            prop_assert_eq!(bigger.n_links(), n + 1);
            prop_assert!(pattern_of_matching(bigger.links()).is_ok());
            prop_assert_eq!(&bigger.remove_link((pos, pos + 1)).unwrap(), alpha);
        }
    }
}
