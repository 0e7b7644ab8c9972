//! Set partitions as restricted growth strings.

use rand::Rng;

/// Largest support for which partitions are enumerated exhaustively.
pub const ENUMERATION_CAP: usize = 12;

/// All set partitions of `{0, …, n−1}` into at most `max_blocks` blocks, as
/// restricted growth strings: `labels[0] = 0` and
/// `labels[i] ≤ 1 + max(labels[..i])`, in lexicographic order.
#[derive(Debug, Clone)]
pub struct SetPartitions {
    labels: Vec<u8>,
    // maxima[i] = max(labels[..=i])
    maxima: Vec<u8>,
    max_blocks: u8,
    done: bool,
}

impl SetPartitions {
    pub fn new(n: usize, max_blocks: usize) -> Self {
        assert!(n <= u8::MAX as usize, "too many atoms for a label vector");
        let max_blocks = max_blocks.clamp(1, n.max(1)) as u8;
        Self {
            labels: vec![0; n],
            maxima: vec![0; n],
            max_blocks,
            done: n == 0,
        }
    }
}

impl Iterator for SetPartitions {
    type Item = Vec<u8>;

    fn next(&mut self) -> Option<Vec<u8>> {
        if self.done {
            return None;
        }
        let out = self.labels.clone();
        // Advance: find the rightmost position that can be incremented.
        let n = self.labels.len();
        let mut i = n;
        loop {
            if i <= 1 {
                self.done = true;
                break;
            }
            i -= 1;
            let prev_max = self.maxima[i - 1];
            let limit = (prev_max + 1).min(self.max_blocks - 1);
            if self.labels[i] < limit {
                self.labels[i] += 1;
                self.maxima[i] = prev_max.max(self.labels[i]);
                for j in i + 1..n {
                    self.labels[j] = 0;
                    self.maxima[j] = self.maxima[i];
                }
                break;
            }
        }
        Some(out)
    }
}

/// Bell number `B_n` (number of set partitions of an `n`-set).
pub fn bell(n: usize) -> u128 {
    // Bell triangle.
    let mut row = vec![1u128];
    for _ in 0..n {
        let mut next = Vec::with_capacity(row.len() + 1);
        next.push(*row.last().unwrap());
        for &x in &row {
            let last = *next.last().unwrap();
            next.push(last + x);
        }
        row = next;
    }
    row[0]
}

/// Labels of a random partition into at most `max_blocks` blocks, as a
/// normalised restricted growth string.
pub fn random_partition<R: Rng>(rng: &mut R, n: usize, max_blocks: usize) -> Vec<u8> {
    let k = max_blocks.clamp(1, n.max(1));
    let raw: Vec<usize> = (0..n).map(|_| rng.random_range(0..k)).collect();
    normalise(&raw)
}

/// Relabels so that labels appear in order of first occurrence.
pub fn normalise(raw: &[usize]) -> Vec<u8> {
    let mut map: Vec<Option<u8>> = Vec::new();
    let mut next = 0u8;
    raw.iter()
        .map(|&r| {
            if r >= map.len() {
                map.resize(r + 1, None);
            }
            *map[r].get_or_insert_with(|| {
                next += 1;
                next - 1
            })
        })
        .collect()
}

/// Groups `items` by label into blocks.
pub fn blocks_of(labels: &[u8], items: &[usize]) -> Vec<Vec<usize>> {
    let count = labels.iter().map(|&l| l as usize + 1).max().unwrap_or(0);
    let mut blocks = vec![Vec::new(); count];
    for (&l, &it) in labels.iter().zip(items) {
        blocks[l as usize].push(it);
    }
    blocks
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;

    #[test]
    fn counts_match_bell_numbers() {
        for n in 1..=8 {
            assert_eq!(SetPartitions::new(n, n).count() as u128, bell(n), "n = {n}");
        }
        assert_eq!(bell(12), 4_213_597);
    }

    #[test]
    fn bounded_block_counts_are_stirling_sums() {
        // S(5,1) + S(5,2) = 1 + 15
        assert_eq!(SetPartitions::new(5, 2).count(), 16);
        // S(5,1) + S(5,2) + S(5,3) = 1 + 15 + 25
        assert_eq!(SetPartitions::new(5, 3).count(), 41);
        assert_eq!(SetPartitions::new(4, 1).count(), 1);
    }

    #[test]
    fn strings_are_restricted_growth() {
        for p in SetPartitions::new(6, 6) {
            let mut m = 0;
            assert_eq!(p[0], 0);
            for &l in &p[1..] {
                assert!(l <= m + 1);
                m = m.max(l);
            }
        }
    }

    #[test]
    fn random_partitions_are_normalised() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(4);
        for _ in 0..50 {
            let p = random_partition(&mut rng, 7, 3);
            assert_eq!(p[0], 0);
            assert!(p.iter().all(|&l| l < 3));
        }
        assert_eq!(normalise(&[2, 2, 0, 5, 0]), vec![0, 0, 1, 2, 1]);
    }

    #[test]
    fn grouping() {
        assert_eq!(blocks_of(&[0, 1, 0], &[4, 7, 9]), vec![vec![4, 9], vec![7]]);
    }
}
