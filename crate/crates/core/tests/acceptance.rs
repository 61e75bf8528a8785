use num_bigint::BigInt;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::collections::BTreeMap;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::PathBuf;
use std::time::{Duration, Instant};
use tdesign::arith::{lambda_max, lambda_min, lim};
use tdesign::catalog::Catalog;
use tdesign::constructor::{
    assemble, cross_union, observed_l, predicted_counts, resolution_union, union_blocks, IngredientBundle,
    PointPartition,
};
use tdesign::design::{
    class_distance, verify_resolution, verify_t_design_with, CountingMethod, Design, Resolution, TVerdict,
    DEFAULT_BUDGET,
};
use tdesign::generators::{backtrack_large_set, complete_design, round_robin_one_factorization};
use tdesign::io;
use tdesign::solver::{
    classify_case, dedup_symmetric, enumerate_solutions, evaluate_l, filter_by_existence, summarize, w_eps_from_z,
    z_from_w_eps, Case, Constructible, PairRole, PairSpec, ProblemSpec, Scenario, SolutionRecord, SolveOptions,
    SolveSummary,
};

const M_5_38_10: [u64; 131] = [
    12768, 17416, 2604, 6076, 7252, 10724, 13668, 15108, 15372, 18580,
    18844, 3768, 6976, 8416, 8680, 11624, 11888, 12152, 16272, 16536,
    16800, 19744, 4932, 8404, 9580, 9844, 12788, 13052, 13316, 13580,
    17172, 17436, 17700, 17964, 18228, 6096, 9040, 10480, 10744, 11008,
    13952, 11536, 14216, 14480, 15920, 18600, 18864, 19128, 7260, 11644,
    11908, 12172, 14852, 15116, 15380, 15644, 16556, 16820, 19500, 17084,
    19764, 8424, 11368, 12544, 12808, 13072, 13336, 16016, 16280, 16544,
    16808, 17984, 9060, 9588, 13972, 14236, 16916, 14500, 17180, 17444,
    17708, 18884, 19148, 10224, 10752, 14872, 15136, 15400, 18080, 15664,
    18344, 18608, 19520, 11388, 11916, 16036, 16300, 16564, 19244, 16828,
    19508, 19772, 12552, 13080, 17200, 17464, 17728, 13716, 14244, 18100,
    18364, 18628, 18892, 19156, 14880, 15408, 19264, 19528, 16044, 17208,
    18384, 18372, 19536, 16844, 11316, 13908, 14280, 14808, 19720, 16872,
    17772,
];

const M_5_46_10: [u64; 176] = [
    65246, 75487, 73758, 83999, 86526, 94240, 96140, 96767, 106381, 107008,
    116622, 117021, 125134, 123405, 127262, 139004, 137503, 142633, 139403, 143887,
    149644, 151772, 159885, 162013, 164540, 166668, 174781, 185497, 59014, 79667,
    78166, 89908, 88179, 92435, 98420, 102676, 108661, 110561, 120802, 126160,
    122930, 125058, 131043, 136401, 133171, 139555, 137826, 145540, 153425, 157054,
    158308, 175807, 174705, 184319, 182818, 184946, 77064, 94088, 99446, 96216,
    104329, 109687, 102600, 119928, 112841, 116698, 121828, 115368, 123082, 132069,
    124982, 125609, 130967, 142310, 135223, 140581, 135850, 141208, 145464, 150822,
    145863, 153976, 156104, 163590, 167846, 166345, 171475, 168245, 178486, 183844,
    180614, 185972, 86526, 105355, 113867, 112366, 118750, 124108, 126635, 134349,
    127262, 136249, 134748, 131518, 136876, 137503, 146490, 139403, 147117, 140030,
    156731, 149644, 155002, 151772, 157130, 150271, 153900, 159885, 165243, 162013,
    167371, 166668, 177612, 174382, 179512, 182267, 185896, 187150, 121505, 119776,
    128288, 132544, 138529, 142785, 148770, 145540, 150670, 160911, 163039, 159809,
    171152, 169423, 164692, 170050, 168321, 179664, 174705, 182818, 184946, 135850,
    148694, 152950, 158707, 163191, 165091, 163590, 165718, 171076, 175332, 179189,
    175959, 181317, 174230, 185573, 178486, 183844, 180614, 185972, 184471, 182742,
    176985, 164540, 177612, 179512, 187226, 173052,
];

const M_5_36_10: [u64; 27] = [
    611, 818, 921, 945, 969, 1048, 1072, 911, 934, 1094,
    1197, 1221, 1245, 1269, 1324, 1325, 1348, 1187, 1210, 1234,
    1337, 1152, 1176, 1200, 1224, 1303, 1131,
];

type Check = Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn data_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("data")
}

fn problem(name: &str) -> ProblemSpec {
    let path = data_dir().join("problems").join(format!("{name}.json"));
    io::problem_from_json(&io::read_file(&path).unwrap()).unwrap()
}

struct Solved {
    spec: ProblemSpec,
    raw: Vec<SolutionRecord>,
    kept: Vec<SolutionRecord>,
    summary: SolveSummary,
}

impl Solved {
    fn up_to_lim(&self) -> Vec<&SolutionRecord> {
        let lim = self.spec.lim();
        self.kept.iter().filter(|r| r.m <= lim).collect()
    }

    fn ms_up_to_lim(&self) -> Vec<u64> {
        self.up_to_lim().iter().map(|r| u64::try_from(&r.m).unwrap()).collect()
    }

    fn constructible_up_to_lim(&self) -> Vec<SolutionRecord> {
        self.up_to_lim()
            .into_iter()
            .filter(|r| r.constructible == Some(Constructible::Yes))
            .cloned()
            .collect()
    }
}

fn solve(name: &str) -> Solved {
    let spec = problem(name);
    let raw = enumerate_solutions(&spec, &SolveOptions::default()).unwrap();
    let mut kept = dedup_symmetric(&spec, raw.clone());
    filter_by_existence(&spec, &mut kept, &Catalog::builtin());
    let summary = summarize(&spec, &raw, &kept);
    Solved { spec, raw, kept, summary }
}

fn big_map(pairs: &[(u32, u64)]) -> BTreeMap<u32, BigInt> {
    pairs.iter().map(|&(j, x)| (j, BigInt::from(x))).collect()
}

/// An expected assignment: unused pairs, `z` values, left and right indices.
struct Expected<'a> {
    m: u64,
    off: &'a [u32],
    z: &'a [(u32, u64)],
    left: &'a [(u32, u64)],
    right: &'a [(u32, u64)],
}

impl Expected<'_> {
    fn symmetric<'a>(m: u64, off: &'a [u32], z: &'a [(u32, u64)], both: &'a [(u32, u64)]) -> Expected<'a> {
        Expected {
            m,
            off,
            z,
            left: both,
            right: both,
        }
    }

    fn record(&self, spec: &ProblemSpec) -> SolutionRecord {
        let k = spec.k();
        SolutionRecord {
            lambda: BigInt::from(self.m) * spec.lambda_min(),
            m: BigInt::from(self.m),
            u: (0..=k).map(|i| !self.off.contains(&i)).collect(),
            z: self.z.iter().copied().collect(),
            lambda_left: big_map(self.left),
            lambda_right: big_map(self.right),
            constructible: None,
            orbit: 1,
        }
    }

    fn matches(&self, rec: &SolutionRecord, spec: &ProblemSpec) -> bool {
        let q = self.record(spec);
        rec.m == q.m && rec.u == q.u && rec.z == q.z && rec.lambda_left == q.lambda_left && rec.lambda_right == q.lambda_right
    }

    fn find<'r>(&self, s: &'r Solved) -> Result<&'r SolutionRecord, String> {
        let found = s.kept.iter().chain(s.raw.iter()).find(|r| self.matches(r, &s.spec));
        found.ok_or_else(|| format!("{}: no solution with the expected assignment for m = {}", s.spec.name, self.m))
    }

    fn holds(&self, spec: &ProblemSpec) -> bool {
        let q = self.record(spec);
        evaluate_l(spec, &q).is_ok_and(|l| l.iter().all(|x| *x == q.lambda))
    }
}

fn within(start: Instant, limit: Duration) -> Result<(), String> {
    ensure(start.elapsed() <= limit, || format!("took {:.1?}, limit {limit:?}", start.elapsed()))
}

fn crit1() -> Check {
    let checks = [
        (lambda_min(5, 8, 38), 4u64),
        (lambda_max(5, 8, 38), 5456),
        (lim(5, 8, 38), 682),
        (lim(5, 10, 38), 19778),
    ];
    for (i, (got, want)) in checks.iter().enumerate() {
        ensure(*got == BigInt::from(*want), || format!("value {i}: {got} != {want}"))?;
    }
    Ok("lambda_min(5,8,38)=4, lambda_max=5456, LIM=682, LIM(5,10,38)=19778".into())
}

const TABLE_5_38_8: &str = "m,z3,z4,z5,lambda6,lambda7,lambda8
280,7,0,7,0,35,56
488,8,4,8,4,28,280
524,6,7,6,6,28,196
560,4,10,4,8,28,112
560,9,5,9,4,49,112
";

fn crit2() -> Check {
    let start = Instant::now();
    let s = solve("5-38-8");
    within(start, Duration::from_secs(120))?;
    let sm = &s.summary;
    ensure(sm.deduplicated == 33 && sm.deduplicated_up_to_lim == 16, || format!("{sm:?}"))?;
    let table = io::emit_table(&s.spec, &s.constructible_up_to_lim());
    ensure(table == TABLE_5_38_8, || format!("table differs:\n{table}"))?;
    Ok(format!(
        "33 solutions, 16 with m <= 682 (raw {}/{}, distinct m {}/{}); 5 constructible rows cell-exact; {:.2?}",
        sm.raw,
        sm.raw_up_to_lim,
        sm.distinct_m,
        sm.distinct_m_up_to_lim,
        start.elapsed()
    ))
}

/// Row 582 carries `z = (3,11,4,10)`; the reversed order violates the equalities.
const TABLE_5_38_9: &str = "m,z3,z4,z5,z6,lambda7,lambda8,lambda9,lambdabar7,lambdabar8,lambdabar9
100,2,1,1,2,0,56,112,0,56,112
200,4,2,2,4,0,112,224,0,112,224
300,6,3,3,6,0,168,336,0,168,336
400,8,4,4,8,0,224,448,0,224,448
402,5,5,5,5,28,84,546,28,84,546
500,10,5,5,10,0,280,560,0,280,560
502,7,6,6,7,28,140,658,28,140,658
504,4,7,7,4,56,0,756,56,0,756
582,3,11,4,10,28,168,588,63,84,189
602,9,7,7,9,28,196,770,28,196,770
604,6,8,8,6,56,56,868,56,56,868
660,9,8,8,9,35,252,21,35,252,21
680,8,11,4,15,0,364,602,35,280,203
682,5,12,5,12,28,224,700,63,140,301
";

fn crit3() -> Check {
    let start = Instant::now();
    let s = solve("5-38-9");
    within(start, Duration::from_secs(300))?;
    let sm = &s.summary;
    ensure(sm.deduplicated_up_to_lim == 20 && sm.distinct_m_up_to_lim == 20, || format!("{sm:?}"))?;
    let table = io::emit_table(&s.spec, &s.constructible_up_to_lim());
    ensure(table == TABLE_5_38_9, || format!("table differs:\n{table}"))?;
    let reversed = Expected {
        m: 582,
        off: &[],
        z: &[(3, 10), (4, 4), (5, 11), (6, 3)],
        left: &[(7, 28), (8, 168), (9, 588)],
        right: &[(7, 63), (8, 84), (9, 189)],
    };
    ensure(!reversed.holds(&s.spec), || "reversed m=582 row satisfies the equalities".into())?;
    Ok(format!(
        "20 values of m <= 682; 14 constructible rows cell-exact, row 582 with z = (3,11,4,10) since the reversed (10,4,11,3) violates the equalities; {:.2?}",
        start.elapsed()
    ))
}

fn crit4() -> Check {
    let start = Instant::now();
    let s = solve("5-38-10");
    within(start, Duration::from_secs(900))?;
    let sm = &s.summary;
    ensure(sm.deduplicated == 479 && sm.deduplicated_up_to_lim == 239, || format!("{sm:?}"))?;
    let ms = s.ms_up_to_lim();
    let missing: Vec<u64> = M_5_38_10.iter().copied().filter(|m| !ms.contains(m)).collect();
    ensure(missing.is_empty(), || format!("reference m missing: {missing:?}"))?;
    Expected::symmetric(2604, &[2, 5, 8], &[(3, 1), (4, 2), (6, 2), (7, 1)], &[(9, 147), (10, 1260)]).find(&s)?;
    Expected {
        m: 11316,
        off: &[],
        z: &[(3, 2), (4, 8), (5, 2), (6, 7), (7, 4)],
        left: &[(8, 84), (9, 378), (10, 1890)],
        right: &[(8, 140), (9, 336), (10, 294)],
    }
    .find(&s)?;
    Ok(format!(
        "479 solutions, 239 with m <= 19778 (raw {}/{}); all 131 reference m present; m=2604 and m=11316 assignments found; {:.2?}",
        sm.raw,
        sm.raw_up_to_lim,
        start.elapsed()
    ))
}

fn spot(name: &str, check: impl FnOnce(&Solved) -> Result<String, String>) -> Result<String, String> {
    let start = Instant::now();
    let s = solve(name);
    within(start, Duration::from_secs(600))?;
    let detail = check(&s).map_err(|e| format!("{name}: {e}"))?;
    Ok(format!("{name} {detail} ({:.2?})", start.elapsed()))
}

fn sorted(mut v: Vec<u64>) -> Vec<u64> {
    v.sort_unstable();
    v
}

fn crit5() -> Check {
    let mut parts = Vec::new();
    parts.push(spot("4-26-8", |s| {
        ensure(sorted(s.ms_up_to_lim()) == [44, 66, 66], || format!("m = {:?}", s.ms_up_to_lim()))?;
        Expected::symmetric(66, &[2, 4, 6], &[(3, 7), (5, 7)], &[(7, 42), (8, 126)]).find(s)?;
        Expected::symmetric(66, &[1, 7], &[(3, 2), (4, 24), (5, 2)], &[(6, 18), (8, 126)]).find(s)?;
        Ok("m={44,66,66}, both m=66 assignments".into())
    })?);
    parts.push(spot("4-28-9", |s| {
        ensure(s.ms_up_to_lim() == [110], || format!("m = {:?}", s.ms_up_to_lim()))?;
        Expected::symmetric(110, &[2, 7], &[(4, 4), (5, 4)], &[(6, 30), (8, 210), (9, 252)]).find(s)?;
        Ok("m={110} with its assignment".into())
    })?);
    parts.push(spot("4-30-7", |s| {
        ensure(sorted(s.ms_up_to_lim()) == [39, 52, 65], || format!("m = {:?}", s.ms_up_to_lim()))?;
        Expected::symmetric(52, &[], &[(3, 5), (4, 5)], &[(5, 5), (6, 15), (7, 115)]).find(s)?;
        Ok("m={39,52,65}, m=52 with z3=z4=5".into())
    })?);
    parts.push(spot("5-36-10", |s| {
        let ms = s.ms_up_to_lim();
        ensure(ms.len() == 164, || format!("{} solutions", ms.len()))?;
        let missing: Vec<u64> = M_5_36_10.iter().copied().filter(|m| !ms.contains(m)).collect();
        ensure(missing.is_empty(), || format!("missing {missing:?}"))?;
        Ok("164 solutions, 27 reference m present".into())
    })?);
    parts.push(spot("5-37-8", |s| {
        ensure(s.ms_up_to_lim() == [55], || format!("m = {:?}", s.ms_up_to_lim()))?;
        Expected {
            m: 55,
            off: &[],
            z: &[(3, 2), (4, 8), (5, 2)],
            left: &[(6, 4), (7, 28), (8, 56)],
            right: &[(6, 13), (7, 36), (8, 666)],
        }
        .find(s)?;
        Ok("m={55} with its asymmetric assignment".into())
    })?);
    parts.push(spot("5-37-9", |s| {
        ensure(s.ms_up_to_lim() == [874], || format!("m = {:?}", s.ms_up_to_lim()))?;
        let right = [(7, 72), (8, 30), (9, 1980)];
        Expected {
            m: 874,
            off: &[8, 9],
            z: &[(3, 1), (4, 4), (5, 2), (6, 2)],
            left: &[(7, 14)],
            right: &right,
        }
        .find(s)?;
        let reversed = Expected {
            m: 874,
            off: &[8, 9],
            z: &[(3, 2), (4, 2), (5, 4), (6, 1)],
            left: &[(7, 14)],
            right: &right,
        };
        ensure(!reversed.holds(&s.spec), || "reversed z order satisfies the equalities".into())?;
        Ok("m={874}, z=(1,4,2,2) with right indices on block sizes 7,8,9".into())
    })?);
    parts.push(spot("5-44-8", |s| {
        let ms = s.ms_up_to_lim();
        ensure(ms.len() == 9 && ms.contains(&3344), || format!("m = {ms:?}"))?;
        let both = [(6, 12), (7, 16), (8, 220)];
        let rec = Expected::symmetric(3344, &[3, 5], &[(4, 14)], &both).find(s)?;
        ensure(rec.constructible == Some(Constructible::Yes), || "m=3344 not flagged constructible".into())?;
        ensure(!Expected::symmetric(3344, &[3, 5], &[(4, 4)], &both).holds(&s.spec), || "z4=4 holds".into())?;
        Ok("9 solutions, m=3344 constructible with z4=14".into())
    })?);
    parts.push(spot("5-46-10", |s| {
        let ms = s.ms_up_to_lim();
        ensure(ms.len() == 3986, || format!("{} solutions", ms.len()))?;
        let mut need: BTreeMap<u64, usize> = BTreeMap::new();
        for m in M_5_46_10 {
            *need.entry(m).or_default() += 1;
        }
        for (m, n) in &need {
            let have = ms.iter().filter(|x| *x == m).count();
            ensure(have >= *n, || format!("m={m} listed {n} times, {have} solutions"))?;
        }
        let both = [(7, 36), (9, 810), (10, 7812)];
        Expected::symmetric(59014, &[2, 8], &[(4, 1), (5, 20), (6, 1)], &both).find(s)?;
        Ok("3986 solutions, 176 reference m present with multiplicity, m=59014 assignment".into())
    })?);
    parts.push(spot("6-38-10", |s| {
        ensure(sorted(s.ms_up_to_lim()) == [892, 1340, 1360, 1788], || format!("m = {:?}", s.ms_up_to_lim()))?;
        Ok("m={892,1340,1360,1788}".into())
    })?);
    parts.push(spot("6-46-12", |s| {
        ensure(sorted(s.ms_up_to_lim()) == [3363, 3819], || format!("m = {:?}", s.ms_up_to_lim()))?;
        let both = [(7, 7), (8, 40), (9, 340), (10, 350), (11, 4046), (12, 5320)];
        let rec = Expected::symmetric(3363, &[], &[(6, 1)], &both).find(s)?;
        ensure(rec.constructible == Some(Constructible::Unknown), || format!("flag {:?}", rec.constructible))?;
        ensure(!Catalog::builtin().design_known(6, 23, 10, &BigInt::from(350)), || "6-(23,10,350) known".into())?;
        Ok("m={3363,3819}, m=3363 unknown through 6-(23,10,350)".into())
    })?);
    parts.push(spot("6-50-12", |s| {
        ensure(s.ms_up_to_lim().len() == 195, || format!("{} solutions", s.ms_up_to_lim().len()))?;
        Ok("195 solutions".into())
    })?);
    Ok(parts.join("; "))
}

fn desk_bundle(spec: &ProblemSpec, rec: &SolutionRecord) -> IngredientBundle {
    let path = data_dir().join("bundles").join("3-12-4.json");
    let mut b = io::bundle_from_json(&io::read_file(&path).unwrap(), spec, path.parent().unwrap(), DEFAULT_BUDGET).unwrap();
    b.fill_complete(spec, rec, DEFAULT_BUDGET).unwrap();
    b
}

fn crit6() -> Check {
    let start = Instant::now();
    let s = solve("3-12-4");
    let by_lambda = |l: u64| s.kept.iter().find(|r| r.lambda == BigInt::from(l)).cloned();
    let six = by_lambda(6).ok_or("no solution with Lambda = 6")?;
    let nine = by_lambda(9).ok_or("no solution with Lambda = 9")?;
    ensure(six.z.get(&2) == Some(&2) && nine.z.get(&2) == Some(&5), || "unexpected z values".into())?;
    let b6 = assemble(&s.spec, &six, &desk_bundle(&s.spec, &six), DEFAULT_BUDGET).map_err(|e| e.to_string())?;
    ensure(b6.design.len() == 330, || format!("{} blocks", b6.design.len()))?;
    let oracle = verify_t_design_with(&b6.design, 3, CountingMethod::Enumerate, DEFAULT_BUDGET).unwrap();
    ensure(oracle == TVerdict::Regular { lambda: 6 }, || format!("{oracle:?}"))?;
    let b9 = assemble(&s.spec, &nine, &desk_bundle(&s.spec, &nine), DEFAULT_BUDGET).map_err(|e| e.to_string())?;
    ensure(b9.design == complete_design(12, 4, DEFAULT_BUDGET).unwrap(), || "z=5 build is not complete".into())?;
    within(start, Duration::from_secs(5))?;
    Ok(format!(
        "Lambda=6 (z=2): simple, 330 blocks, all 220 triples in 6 blocks; Lambda=9 (z=5): complete design, 495 blocks; {:.2?}",
        start.elapsed()
    ))
}

fn relabel(r: &Resolution, perm: &[u32], shuffle: &[usize]) -> Resolution {
    let classes = shuffle
        .iter()
        .map(|&h| r.class_blocks(h + 1).map(|b| b.iter().map(|&p| perm[p as usize]).collect()).collect())
        .collect();
    Resolution::from_class_blocks(r.design.v(), r.design.k(), classes, r.s, r.tau).unwrap()
}

fn random_relabel(r: &Resolution, rng: &mut ChaCha8Rng) -> Resolution {
    let mut perm: Vec<u32> = (0..r.design.v()).collect();
    perm.shuffle(rng);
    let mut shuffle: Vec<usize> = (0..r.class_count()).collect();
    shuffle.shuffle(rng);
    relabel(r, &perm, &shuffle)
}

fn suite(name: &str, body: impl FnOnce() -> Result<String, String>) -> Result<String, String> {
    let start = Instant::now();
    let detail = body().map_err(|e| format!("{name}: {e}"))?;
    within(start, Duration::from_secs(60)).map_err(|e| format!("{name}: {e}"))?;
    Ok(format!("{name} {detail} ({:.2?})", start.elapsed()))
}

fn crit7() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(20_160_801);
    let mut parts = Vec::new();
    parts.push(suite("(i)", || {
        let mut cases = 0;
        for n in 1..=20usize {
            for z in 1..=n as u64 {
                let (w, eps) = w_eps_from_z(z, n as u64).map_err(|e| e.to_string())?;
                ensure(z_from_w_eps(w, eps, n as u64).ok() == Some(z), || format!("z={z} N={n}"))?;
                for h in 1..=n {
                    let count = (1..=n)
                        .filter(|&j| {
                            let d = class_distance(h, j, n).unwrap() as u64;
                            eps as u64 <= d && d <= w
                        })
                        .count() as u64;
                    ensure(count == z, || format!("z={z} N={n} h={h}: {count} partners"))?;
                    cases += 1;
                }
            }
        }
        Ok(format!("{cases} (z, N, h) cases"))
    })?);
    parts.push(suite("(ii)", || {
        let mut cases = 0;
        for t in 0..=8u32 {
            for sl in 0..=t {
                for sr in 0..=t {
                    if sl + sr < 2 * (t / 2) {
                        continue;
                    }
                    for r in 0..=t {
                        let want = match (r <= sl, t - r <= sr) {
                            (true, true) => Case::A,
                            (true, false) => Case::B,
                            (false, true) => Case::C,
                            (false, false) => return Err(format!("condition admits r={r} sl={sl} sr={sr} t={t}")),
                        };
                        ensure(classify_case(r, sl, sr, t).ok() == Some(want), || format!("r={r} t={t}"))?;
                        cases += 1;
                    }
                }
            }
        }
        Ok(format!("{cases} cases total"))
    })?);
    parts.push(suite("(iii)", || {
        let ls7 = backtrack_large_set(2, 3, 9, 7, 10_000_000).map_err(|e| e.to_string())?;
        for case in 0..20 {
            let (a, b) = if case % 4 == 3 {
                (random_relabel(&ls7, &mut rng), random_relabel(&ls7, &mut rng))
            } else {
                let v = [4, 6, 8, 10, 12][rng.gen_range(0..5)];
                let rr = round_robin_one_factorization(v).unwrap();
                (random_relabel(&rr, &mut rng), random_relabel(&rr, &mut rng))
            };
            let n = a.class_count() as u64;
            let p = PointPartition {
                v1: a.design.v(),
                v2: b.design.v(),
            };
            let (w, eps) = w_eps_from_z(n, n).unwrap();
            let k = a.design.k() + b.design.k();
            let via_res = Design::new(p.v(), k, resolution_union(&a, &b, eps, w, p).unwrap()).unwrap();
            let via_cross = Design::new(p.v(), k, cross_union(&a.design, &b.design, p).unwrap()).unwrap();
            let (x, y) = (io::design_to_json(&via_res, &Default::default()), io::design_to_json(&via_cross, &Default::default()));
            ensure(x == y, || format!("case {case}: block sets differ"))?;
        }
        Ok("20 bundles byte-identical".into())
    })?);
    parts.push(suite("(iv)", || {
        for case in 0..20 {
            let (spec, rec, bundle) = random_scenario(&mut rng);
            let (blocks, _) = union_blocks(&spec, &rec, &bundle, DEFAULT_BUDGET).map_err(|e| format!("case {case}: {e}"))?;
            let part = PointPartition {
                v1: spec.scenario.v1,
                v2: spec.scenario.v2,
            };
            let seen = observed_l(&blocks, part, spec.t(), DEFAULT_BUDGET).unwrap();
            let want: Vec<Option<u64>> = predicted_counts(&spec, &rec).unwrap().l.iter().map(|x| u64::try_from(x).ok()).collect();
            ensure(seen == want, || format!("case {case} {:?}: observed {seen:?}, predicted {want:?}", spec.scenario))?;
        }
        Ok("20 scenarios, L tables equal brute force".into())
    })?);
    parts.push(suite("(v)", || {
        let specs = [problem("3-12-4"), {
            let sc = Scenario { t: 3, k: 4, v1: 8, v2: 8 };
            ProblemSpec::new("3-16-4", sc, vec![PairSpec::resolved(2, 1, 1, 7)]).unwrap()
        }];
        let records: Vec<(usize, SolutionRecord)> = specs
            .iter()
            .enumerate()
            .flat_map(|(n, spec)| {
                enumerate_solutions(spec, &SolveOptions::default())
                    .unwrap()
                    .into_iter()
                    .filter(|r| r.u[2] && r.lambda_left.values().chain(r.lambda_right.values()).all(|l| *l == spec.complete_index(4, 8).min(spec.complete_index(4, spec.scenario.v1))))
                    .map(move |r| (n, r))
            })
            .collect();
        ensure(!records.is_empty(), || "no buildable records".into())?;
        for case in 0..10 {
            let (n, rec) = &records[rng.gen_range(0..records.len())];
            let spec = &specs[*n];
            let v1 = spec.scenario.v1;
            let rr = round_robin_one_factorization(v1).unwrap();
            let mut bundle = IngredientBundle::default();
            bundle.resolutions.insert(2, (rr.clone(), rr.clone()));
            bundle.fill_complete(spec, rec, DEFAULT_BUDGET).unwrap();
            let base = assemble(spec, rec, &bundle, DEFAULT_BUDGET).map_err(|e| e.to_string())?;
            let shift = rng.gen_range(1..rr.class_count());
            let rotated = if case % 2 == 0 {
                (rr.rotated(shift), rr.clone())
            } else {
                (rr.clone(), rr.rotated(shift))
            };
            bundle.resolutions.insert(2, rotated);
            let turned = assemble(spec, rec, &bundle, DEFAULT_BUDGET).map_err(|e| format!("case {case}: {e}"))?;
            ensure(turned.report.verified_lambda == base.report.verified_lambda, || format!("case {case}"))?;
        }
        Ok("10 rotations keep the verdict and Lambda".into())
    })?);
    parts.push(suite("(vi)", || {
        for v in (4..=16).step_by(2) {
            let r = round_robin_one_factorization(v).map_err(|e| e.to_string())?;
            ensure(verify_resolution(&r, DEFAULT_BUDGET).ok() == Some((1, 1)), || format!("v={v}"))?;
        }
        Ok("v = 4..16 verified (1,1)".into())
    })?);
    parts.push(suite("(vii)", || {
        let r = backtrack_large_set(2, 3, 9, 7, 10_000_000).map_err(|e| e.to_string())?;
        ensure(verify_resolution(&r, DEFAULT_BUDGET).ok() == Some((2, 1)), || "not verified".into())?;
        Ok("LS[7](2,3,9) found and verified".into())
    })?);
    Ok(parts.join("; "))
}

/// A random small scenario with a record built from complete designs,
/// 1-factorizations and unions of 1-factorization classes. The record need
/// not be a solution.
fn random_scenario(rng: &mut ChaCha8Rng) -> (ProblemSpec, SolutionRecord, IngredientBundle) {
    let t = rng.gen_range(1..=3u32);
    let v1 = [4, 6, 8][rng.gen_range(0..3)];
    let v2 = [4, 6, 8][rng.gen_range(0..3)];
    let k = rng.gen_range(t.max(2)..=4u32);
    let resolved = k == 4 && v1 == v2 && rng.gen_bool(0.7);
    let listed = if resolved { vec![PairSpec::resolved(2, 1, 1, v1 as u64 - 1)] } else { Vec::new() };
    let spec = ProblemSpec::new("random", Scenario { t, k, v1, v2 }, listed).unwrap();
    let mut rec = SolutionRecord {
        lambda: BigInt::from(0),
        m: BigInt::from(0),
        u: vec![false; k as usize + 1],
        z: BTreeMap::new(),
        lambda_left: BTreeMap::new(),
        lambda_right: BTreeMap::new(),
        constructible: None,
        orbit: 1,
    };
    let mut bundle = IngredientBundle::default();
    for i in 0..=k {
        let j = k - i;
        let role = spec.role(i);
        if role == PairRole::Off || rng.gen_bool(0.25) {
            continue;
        }
        rec.u[i as usize] = true;
        if role == PairRole::Resolved {
            let (a, b) = (round_robin_one_factorization(v1).unwrap(), round_robin_one_factorization(v2).unwrap());
            bundle.resolutions.insert(i, (random_relabel(&a, rng), random_relabel(&b, rng)));
            rec.z.insert(i, rng.gen_range(1..v1 as u64));
            continue;
        }
        let side = |block: u32, v: u32, variable: bool, rng: &mut ChaCha8Rng| -> (Design, Option<BigInt>) {
            if variable && block == 2 && t == 1 && rng.gen_bool(0.6) {
                let rr = random_relabel(&round_robin_one_factorization(v).unwrap(), rng);
                let c = rng.gen_range(1..=rr.class_count());
                let blocks = (1..=c).flat_map(|h| rr.class_blocks(h).cloned().collect::<Vec<_>>()).collect();
                (Design::new(v, 2, blocks).unwrap(), Some(BigInt::from(c)))
            } else {
                let d = complete_design(v, block, DEFAULT_BUDGET).unwrap();
                (d, variable.then(|| spec.complete_index(block, v)))
            }
        };
        let (left, li) = side(i, v1, matches!(role, PairRole::LeftVariable | PairRole::BothVariable), rng);
        let (right, ri) = side(j, v2, matches!(role, PairRole::RightVariable | PairRole::BothVariable), rng);
        bundle.left.insert(i, left);
        bundle.right.insert(j, right);
        if let Some(l) = li {
            rec.lambda_left.insert(i, l);
        }
        if let Some(l) = ri {
            rec.lambda_right.insert(j, l);
        }
    }
    (spec, rec, bundle)
}

fn main() {
    let criteria: [(&str, fn() -> Check); 7] = [
        ("arithmetic golden values", crit1),
        ("5-38-8 constructible table", crit2),
        ("5-38-9 constructible table", crit3),
        ("5-38-10 counts and m-list", crit4),
        ("spot suite", crit5),
        ("end-to-end construction (3-12-4)", crit6),
        ("property suites", crit7),
    ];
    let mut failed = 0;
    for (n, (name, f)) in criteria.iter().enumerate() {
        let outcome = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|e| {
            let msg = e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            Err(format!("panic: {msg}"))
        });
        match outcome {
            Ok(detail) => println!("criterion {}: PASS {name}: {detail}", n + 1),
            Err(detail) => {
                failed += 1;
                println!("criterion {}: FAIL {name}: {detail}", n + 1);
            }
        }
    }
    if failed > 0 {
        std::process::exit(1);
    }
}
