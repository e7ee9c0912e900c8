//! Sieve of Eratosthenes for the prime-restricted rationals.

pub struct Sieve {
    composite: Vec<bool>,
}

impl Sieve {
    pub fn new(n: u64) -> Self {
        let n = n as usize;
        let mut composite = vec![false; n + 1];
        composite[0] = true;
        if n >= 1 {
            composite[1] = true;
        }
        let mut i = 2;
        while i * i <= n {
            if !composite[i] {
                let mut j = i * i;
                while j <= n {
                    composite[j] = true;
                    j += i;
                }
            }
            i += 1;
        }
        Self { composite }
    }

    pub fn is_prime(&self, x: u64) -> bool {
        self.composite.get(x as usize).is_some_and(|c| !c)
    }

    /// `pi[x]` = number of primes `≤ x`.
    pub fn prefix_counts(&self) -> Vec<u64> {
        let mut acc = 0;
        self.composite
            .iter()
            .map(|&c| {
                if !c {
                    acc += 1;
                }
                acc
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn trial(x: u64) -> bool {
        x >= 2 && (2..x).take_while(|d| d * d <= x).all(|d| x % d != 0)
    }

    #[test]
    fn matches_trial_division() {
        let s = Sieve::new(2000);
        for x in 0..=2000 {
            assert_eq!(s.is_prime(x), trial(x), "{x}");
        }
        assert!(!s.is_prime(2001));
        assert_eq!(s.prefix_counts()[1000], 168);
    }
}
