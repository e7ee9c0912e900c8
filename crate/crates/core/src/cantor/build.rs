use std::collections::HashMap;
use std::io::Write;

use num::rational::{BigRational, Ratio};
use num::{BigInt, One, Zero};
use serde::{Deserialize, Serialize};

use super::{plan_level, Branch, CantorError, ConstructionPlan, Funcs, LevelPlan, ParentClass};
use crate::funcs::FuncError;
use crate::geometry::Ball;
use crate::systems::{farey::Frac, rational_values_in};

#[derive(Clone, Debug, PartialEq)]
pub struct CantorBall {
    pub id: usize,
    pub level: u32,
    pub sublevel: u32,
    pub u_index: u32,
    pub parent: Option<usize>,
    pub center: Ratio<i128>,
    /// Window representative `(p, q)` of the centre.
    pub rep: (u64, u64),
    pub radius: f64,
    pub mass: Option<BigRational>,
}

/// Counts for one sub-level inside one parent ball.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SublevelRecord {
    pub level: u32,
    pub parent: Option<usize>,
    pub sublevel: u32,
    pub u_index: u32,
    pub target: u64,
    pub g_count: u64,
    pub u_count: u64,
    pub v_count: u64,
    pub psi: f64,
    pub rho: f64,
    pub h: Option<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct CantorTree {
    pub plan: ConstructionPlan,
    pub root_center: BigRational,
    pub root_radius: f64,
    pub balls: Vec<CantorBall>,
    /// Ball ids per level, level 1 first.
    pub levels: Vec<Vec<usize>>,
    pub children: Vec<Vec<usize>>,
    pub records: Vec<SublevelRecord>,
}

impl CantorTree {
    pub fn depth(&self) -> usize {
        self.levels.len()
    }

    /// Children of `parent`; `None` gives the first level.
    pub fn children_of(&self, parent: Option<usize>) -> &[usize] {
        match parent {
            Some(p) => &self.children[p],
            None => self.levels.first().map(|v| v.as_slice()).unwrap_or(&[]),
        }
    }
}

pub(crate) fn frac_cmp(x: Frac, y: Frac) -> std::cmp::Ordering {
    (x.0 * y.1).cmp(&(y.0 * x.1))
}

/// `x − y` as `f64`, exact before the final rounding.
pub(crate) fn frac_diff(x: Frac, y: Frac) -> f64 {
    let (l, r) = (x.0 * y.1, y.0 * x.1);
    let den = (x.1 * y.1) as f64;
    if l >= r {
        (l - r) as f64 / den
    } else {
        -((r - l) as f64 / den)
    }
}

pub(crate) fn to_frac(c: &Ratio<i128>) -> Frac {
    (*c.numer() as u128, *c.denom() as u128)
}

pub(crate) fn to_big(c: &Ratio<i128>) -> BigRational {
    BigRational::new(BigInt::from(*c.numer()), BigInt::from(*c.denom()))
}

fn from_float(x: f64) -> Result<BigRational, CantorError> {
    BigRational::from_float(x).ok_or(CantorError::Func(FuncError::BadCoefficient(x)))
}

/// Thickenings `B(c, h)` of one block, sorted by centre.
#[derive(Default)]
struct Thickenings {
    items: Vec<(Frac, f64)>,
    h_max: f64,
}

impl Thickenings {
    /// Whether `B(x, r)` meets a thickening.
    fn meets(&self, x: Frac, r: f64) -> bool {
        let pos = self.items.partition_point(|&(c, _)| frac_cmp(c, x) == std::cmp::Ordering::Less);
        let reach = r + self.h_max;
        for &(c, h) in &self.items[pos..] {
            let d = frac_diff(c, x);
            if d >= reach {
                break;
            }
            if d < r + h {
                return true;
            }
        }
        for &(c, h) in self.items[..pos].iter().rev() {
            let d = frac_diff(x, c);
            if d >= reach {
                break;
            }
            if d < r + h {
                return true;
            }
        }
        false
    }

    fn extend(&mut self, centres: &[Frac], h: f64) {
        self.items.extend(centres.iter().map(|&c| (c, h)));
        self.items.sort_by(|a, b| frac_cmp(a.0, b.0));
        self.h_max = self.h_max.max(h);
    }
}

struct Builder {
    plan: ConstructionPlan,
    tree: CantorTree,
}

impl Builder {
    fn block(
        &mut self,
        lp: &LevelPlan,
        parent: Option<usize>,
        centre: &BigRational,
        radius: f64,
        parent_u: Option<u32>,
    ) -> Result<(), CantorError> {
        let plan = &self.plan;
        let sys = &plan.system;
        let level = lp.level;
        let blk = lp
            .block_for(parent_u)
            .ok_or_else(|| CantorError::Precondition(format!("no block plan for parent index {parent_u:?}")))?;
        let half = from_float(radius / 2.0)?;
        let (lo, hi) = (centre - &half, centre + &half);
        let mut thick = Thickenings::default();
        for s in &blk.sublevels {
            let (lo_w, hi_w) = sys.window_bounds(s.u_index).map_err(|e| CantorError::Precondition(e.to_string()))?;
            let sep = 6.0 * s.rho;
            let mut g: Vec<(Frac, (u64, u64))> = Vec::new();
            for (x, rep) in rational_values_in(lo_w, hi_w, sys.rational_mode, &lo, &hi) {
                if g.len() as u64 >= s.target_count {
                    break;
                }
                if g.last().map_or(true, |&(y, _)| frac_diff(x, y) > sep) {
                    g.push((x, rep));
                }
            }
            if g.is_empty() {
                return Err(CantorError::EmptyG { level, sublevel: s.i });
            }
            let expected = s.target_count.div_ceil(2);
            if (g.len() as u64) < expected {
                return Err(CantorError::Counting { level, sublevel: s.i, found: g.len() as u64, expected });
            }
            let v: Vec<(Frac, (u64, u64))> = match plan.branch {
                Branch::FiniteG if s.i > 0 => g.iter().copied().filter(|&(x, _)| !thick.meets(x, s.rho)).collect(),
                _ => g.clone(),
            };
            let (gn, vn) = (g.len() as u64, v.len() as u64);
            if 2 * vn < gn {
                return Err(CantorError::HalfSurvival { level, sublevel: s.i, g: gn, v: vn });
            }
            if let Some(h) = s.h {
                thick.extend(&v.iter().map(|p| p.0).collect::<Vec<_>>(), h);
            }
            self.tree.records.push(SublevelRecord {
                level,
                parent,
                sublevel: s.i,
                u_index: s.u_index,
                target: s.target_count,
                g_count: gn,
                u_count: gn - vn,
                v_count: vn,
                psi: s.psi,
                rho: s.rho,
                h: s.h,
            });
            for (x, rep) in v {
                let id = self.tree.balls.len();
                if id as u64 >= plan.limits.max_balls {
                    return Err(CantorError::ResourceCap { level, predicted: id as u64 + 1, cap: plan.limits.max_balls });
                }
                self.tree.balls.push(CantorBall {
                    id,
                    level,
                    sublevel: s.i,
                    u_index: s.u_index,
                    parent,
                    center: Ratio::new(x.0 as i128, x.1 as i128),
                    rep,
                    radius: s.psi,
                    mass: None,
                });
                self.tree.children.push(Vec::new());
                if let Some(p) = parent {
                    self.tree.children[p].push(id);
                }
                self.tree.levels[level as usize - 1].push(id);
            }
        }
        Ok(())
    }
}

/// Builds every planned level inside `plan.within`.
pub fn build_levels(plan: &ConstructionPlan) -> Result<CantorTree, CantorError> {
    let Ball::Interval { center, radius } = plan.within else {
        return Err(CantorError::Precondition("within must be an interval ball".into()));
    };
    let root_center = from_float(center)?;
    let tree = CantorTree {
        plan: plan.clone(),
        root_center: root_center.clone(),
        root_radius: radius,
        balls: Vec::new(),
        levels: vec![Vec::new(); plan.levels.len()],
        children: Vec::new(),
        records: Vec::new(),
    };
    let mut b = Builder { plan: plan.clone(), tree };
    for li in 0..plan.levels.len() {
        if li == 0 {
            let lp = b.plan.levels[0].clone();
            b.block(&lp, None, &root_center, radius, None)?;
            continue;
        }
        let parents = b.tree.levels[li - 1].clone();
        let classes = parent_classes(&b.tree.balls, &parents);
        let lp = plan_level(&b.plan, li as u32 + 1, &classes)?;
        b.plan.levels[li] = lp.clone();
        for p in parents {
            let (c, r, u) = {
                let pb = &b.tree.balls[p];
                (to_big(&pb.center), pb.radius, pb.u_index)
            };
            b.block(&lp, Some(p), &c, r, Some(u))?;
        }
    }
    b.tree.plan = b.plan;
    Ok(b.tree)
}

/// Radius classes of the built parents with their counts and smallest reduced denominators.
fn parent_classes(balls: &[CantorBall], ids: &[usize]) -> Vec<ParentClass> {
    let mut out: Vec<ParentClass> = Vec::new();
    for &i in ids {
        let b = &balls[i];
        let den = *b.center.denom() as f64;
        match out.iter_mut().find(|p| p.u_index == Some(b.u_index)) {
            Some(p) => {
                p.count += 1;
                p.b_min = p.b_min.min(den);
            }
            None => out.push(ParentClass { u_index: Some(b.u_index), radius: b.radius, count: 1, b_min: den }),
        }
    }
    out
}

/// Assigns `μ`: proportional to `f(r)` among siblings (finite G) or uniform (infinite G).
pub fn assign_mass(tree: &mut CantorTree) -> Result<(), CantorError> {
    let plan = &tree.plan;
    let fx = Funcs { sys: &plan.system, psi: &plan.psi, f: &plan.f };
    let mut fr: HashMap<u32, BigRational> = HashMap::new();
    if plan.branch == Branch::FiniteG {
        for b in &tree.balls {
            if !fr.contains_key(&b.u_index) {
                let v = fx.f_at(b.radius).ok_or(CantorError::Func(FuncError::Domain { arg: b.radius, bound: 0.0 }))?;
                fr.insert(b.u_index, from_float(v)?);
            }
        }
    }
    let branch = plan.branch;
    let mut parents: Vec<Option<usize>> = vec![None];
    for lvl in 0..tree.levels.len().saturating_sub(1) {
        parents.extend(tree.levels[lvl].iter().map(|&i| Some(i)));
    }
    for p in parents {
        let kids = tree.children_of(p).to_vec();
        if kids.is_empty() {
            continue;
        }
        let mp = match p {
            Some(i) => tree.balls[i].mass.clone().expect("parent mass assigned first"),
            None => BigRational::one(),
        };
        match branch {
            Branch::FiniteG => {
                let total = kids.iter().fold(BigRational::zero(), |acc, &k| acc + &fr[&tree.balls[k].u_index]);
                let scale = &mp / &total;
                for k in kids {
                    tree.balls[k].mass = Some(&fr[&tree.balls[k].u_index] * &scale);
                }
            }
            Branch::InfiniteG => {
                let m = &mp / BigRational::from_integer(BigInt::from(kids.len()));
                for k in kids {
                    tree.balls[k].mass = Some(m.clone());
                }
            }
        }
    }
    Ok(())
}

/// One line of the tree dump.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BallRecord {
    pub id: usize,
    pub level: u32,
    pub sublevel: u32,
    pub parent_id: Option<usize>,
    pub center: String,
    pub radius: f64,
    pub mass_num: Option<String>,
    pub mass_den: Option<String>,
}

impl From<&CantorBall> for BallRecord {
    fn from(b: &CantorBall) -> Self {
        Self {
            id: b.id,
            level: b.level,
            sublevel: b.sublevel,
            parent_id: b.parent,
            center: format!("{}/{}", b.center.numer(), b.center.denom()),
            radius: b.radius,
            mass_num: b.mass.as_ref().map(|m| m.numer().to_string()),
            mass_den: b.mass.as_ref().map(|m| m.denom().to_string()),
        }
    }
}

/// One JSON object per ball, in id order.
pub fn write_json_lines<W: Write>(tree: &CantorTree, mut w: W) -> std::io::Result<()> {
    for b in &tree.balls {
        serde_json::to_writer(&mut w, &BallRecord::from(b))?;
        w.write_all(b"\n")?;
    }
    Ok(())
}
