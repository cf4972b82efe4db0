/// Fixed-size bitset over `0..len`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BitSet {
    words: Vec<u64>,
    len: usize,
}

impl BitSet {
    pub fn new(len: usize) -> Self {
        BitSet {
            words: vec![0; len.div_ceil(64)],
            len,
        }
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    #[inline]
    pub fn get(&self, i: usize) -> bool {
        i < self.len && (self.words[i >> 6] >> (i & 63)) & 1 == 1
    }

    #[inline]
    pub fn set(&mut self, i: usize) {
        self.words[i >> 6] |= 1 << (i & 63);
    }

    pub fn union_with(&mut self, other: &BitSet) {
        for (a, b) in self.words.iter_mut().zip(&other.words) {
            *a |= *b;
        }
    }

    /// `self |= other << shift`, truncated to `len`.
    pub fn or_shifted(&mut self, other: &BitSet, shift: usize) {
        if shift >= self.len {
            return;
        }
        let (ws, bs) = (shift >> 6, shift & 63);
        for i in (ws..self.words.len()).rev() {
            let src = i - ws;
            let mut v = other.words[src] << bs;
            if bs != 0 && src > 0 {
                v |= other.words[src - 1] >> (64 - bs);
            }
            self.words[i] |= v;
        }
        let tail = self.len & 63;
        if tail != 0 {
            let last = self.words.len() - 1;
            self.words[last] &= (1u64 << tail) - 1;
        }
    }

    pub fn ones(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.len).filter(move |&i| self.get(i))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn shifted_or_matches_naive() {
        let mut a = BitSet::new(200);
        for i in [0, 1, 63, 64, 100, 150] {
            a.set(i);
        }
        for shift in [0, 1, 5, 63, 64, 65, 130, 199, 200] {
            let mut b = BitSet::new(200);
            b.or_shifted(&a, shift);
            let got: Vec<usize> = b.ones().collect();
            let want: Vec<usize> = a.ones().map(|i| i + shift).filter(|&i| i < 200).collect();
            assert_eq!(got, want, "shift {shift}");
        }
    }
}
