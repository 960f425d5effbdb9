use alloc::vec::Vec;
use core::fmt;

/// A set of directions `1..=n`, stored as a bitset.
#[derive(Clone, Default, PartialEq, Eq, Hash)]
pub struct DirSet {
    words: Vec<u64>,
}

impl DirSet {
    pub fn new() -> Self {
        DirSet { words: Vec::new() }
    }

    pub fn insert(&mut self, dir: u32) {
        let (w, b) = Self::slot(dir);
        if self.words.len() <= w {
            self.words.resize(w + 1, 0);
        }
        self.words[w] |= 1 << b;
    }

    pub fn remove(&mut self, dir: u32) {
        let (w, b) = Self::slot(dir);
        if let Some(word) = self.words.get_mut(w) {
            *word &= !(1 << b);
        }
        self.trim();
    }

    pub fn contains(&self, dir: u32) -> bool {
        let (w, b) = Self::slot(dir);
        self.words.get(w).is_some_and(|word| word & (1 << b) != 0)
    }

    pub fn is_empty(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    pub fn len(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    /// Number of members in the inclusive range `lo..=hi`.
    pub fn count_in(&self, lo: u32, hi: u32) -> usize {
        self.iter().filter(|&d| d >= lo && d <= hi).count()
    }

    pub fn any_in(&self, lo: u32, hi: u32) -> bool {
        self.iter().any(|d| d >= lo && d <= hi)
    }

    pub fn max(&self) -> Option<u32> {
        self.iter().last()
    }

    pub fn intersection(&self, other: &DirSet) -> DirSet {
        let mut words: Vec<u64> = self
            .words
            .iter()
            .zip(other.words.iter())
            .map(|(a, b)| a & b)
            .collect();
        while words.last() == Some(&0) {
            words.pop();
        }
        DirSet { words }
    }

    /// Ascending iteration.
    pub fn iter(&self) -> impl Iterator<Item = u32> + '_ {
        self.words.iter().enumerate().flat_map(|(w, &word)| {
            let mut rest = word;
            core::iter::from_fn(move || {
                if rest == 0 {
                    return None;
                }
                let b = rest.trailing_zeros();
                rest &= rest - 1;
                Some(w as u32 * 64 + b + 1)
            })
        })
    }

    fn slot(dir: u32) -> (usize, u32) {
        assert!(dir >= 1, "directions are 1-based");
        let idx = dir - 1;
        ((idx / 64) as usize, idx % 64)
    }

    fn trim(&mut self) {
        while self.words.last() == Some(&0) {
            self.words.pop();
        }
    }
}

impl FromIterator<u32> for DirSet {
    fn from_iter<I: IntoIterator<Item = u32>>(iter: I) -> Self {
        let mut set = DirSet::new();
        set.extend(iter);
        set
    }
}

impl Extend<u32> for DirSet {
    fn extend<I: IntoIterator<Item = u32>>(&mut self, iter: I) {
        for d in iter {
            self.insert(d);
        }
    }
}

impl fmt::Debug for DirSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.iter()).finish()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn insert_remove_iterate() {
        let mut s: DirSet = [5, 70, 1].into_iter().collect();
        assert_eq!(s.iter().collect::<Vec<_>>(), [1, 5, 70]);
        assert_eq!(s.len(), 3);
        assert!(s.contains(70));
        s.remove(70);
        assert_eq!(s, [1, 5].into_iter().collect());
        assert_eq!(s.count_in(2, 6), 1);
        assert!(!s.any_in(2, 4));
    }

    #[test]
    fn equality_ignores_trailing_words() {
        let mut a = DirSet::new();
        a.insert(100);
        a.remove(100);
        assert_eq!(a, DirSet::new());
        assert!(a.is_empty());
    }
}
