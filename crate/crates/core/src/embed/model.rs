use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::harmonics::zonal_nu;

use super::config::ModelConfig;
use super::EmbedError;

/// One zonal convolution layer: a per-degree multiplier spectrum for every
/// input/output channel pair plus a bias per output channel.
#[derive(Clone, Debug, PartialEq)]
pub struct ConvLayer {
    pub bandwidth: usize,
    pub in_channels: usize,
    pub out_channels: usize,
    /// kernels[in * out_channels + out][l], l < bandwidth.
    pub kernels: Vec<Vec<f64>>,
    pub bias: Vec<f64>,
}

impl ConvLayer {
    pub fn kernel(&self, input: usize, output: usize) -> &[f64] {
        &self.kernels[input * self.out_channels + output]
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct VladParams {
    /// Cluster centers, K x D.
    pub centers: Vec<Vec<f64>>,
    /// Assignment weights w_k, K x D.
    pub weights: Vec<Vec<f64>>,
    /// Assignment biases b_k.
    pub biases: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct BranchModel {
    pub layers: Vec<ConvLayer>,
    pub vlad: VladParams,
    /// Linear projection, branch_dim x (K * D), row-major.
    pub projection: Vec<Vec<f64>>,
}

/// The three per-attribute branches plus shared configuration.
#[derive(Clone, Debug, PartialEq)]
pub struct ModelParams {
    pub config: ModelConfig,
    pub seed: u64,
    pub branches: [BranchModel; 3],
}

impl ModelParams {
    /// Deterministic initialization: kernel spectra from scaled uniform
    /// noise, VLAD centers on the unit sphere, small assignment weights,
    /// zero biases.
    pub fn init(config: &ModelConfig, seed: u64) -> Result<ModelParams, EmbedError> {
        config.validate()?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let branches = [
            init_branch(config, &mut rng),
            init_branch(config, &mut rng),
            init_branch(config, &mut rng),
        ];
        Ok(ModelParams { config: config.clone(), seed, branches })
    }

    pub fn layout(&self) -> ParamLayout {
        ParamLayout::new(&self.config)
    }

    /// Flatten every parameter in canonical layout order.
    pub fn to_flat(&self) -> Vec<f64> {
        let mut out = Vec::new();
        for branch in &self.branches {
            for layer in &branch.layers {
                for kernel in &layer.kernels {
                    out.extend_from_slice(kernel);
                }
                out.extend_from_slice(&layer.bias);
            }
            for c in &branch.vlad.centers {
                out.extend_from_slice(c);
            }
            for w in &branch.vlad.weights {
                out.extend_from_slice(w);
            }
            out.extend_from_slice(&branch.vlad.biases);
            for row in &branch.projection {
                out.extend_from_slice(row);
            }
        }
        out
    }

    /// Rebuild parameters from a flat vector in canonical layout order.
    pub fn from_flat(config: &ModelConfig, seed: u64, flat: &[f64]) -> Result<ModelParams, EmbedError> {
        config.validate()?;
        let layout = ParamLayout::new(config);
        if flat.len() != layout.total {
            return Err(EmbedError::BlobSize { expected: layout.total, found: flat.len() });
        }
        let mut cursor = 0usize;
        let mut take = |count: usize| {
            let slice = &flat[cursor..cursor + count];
            cursor += count;
            slice.to_vec()
        };
        let mut branches = Vec::with_capacity(3);
        for _ in 0..3 {
            let mut layers = Vec::new();
            for (idx, b) in config.bandwidths.iter().enumerate() {
                let (cin, cout) = (config.channels[idx], config.channels[idx + 1]);
                let mut kernels = Vec::with_capacity(cin * cout);
                for _ in 0..cin * cout {
                    kernels.push(take(*b));
                }
                let bias = take(cout);
                layers.push(ConvLayer {
                    bandwidth: *b,
                    in_channels: cin,
                    out_channels: cout,
                    kernels,
                    bias,
                });
            }
            let d = config.feature_dim();
            let centers = (0..config.clusters).map(|_| take(d)).collect();
            let weights = (0..config.clusters).map(|_| take(d)).collect();
            let biases = take(config.clusters);
            let projection = (0..config.branch_dim).map(|_| take(config.vlad_dim())).collect();
            layers.shrink_to_fit();
            branches.push(BranchModel {
                layers,
                vlad: VladParams { centers, weights, biases },
                projection,
            });
        }
        let mut it = branches.into_iter();
        Ok(ModelParams {
            config: config.clone(),
            seed,
            branches: [it.next().unwrap(), it.next().unwrap(), it.next().unwrap()],
        })
    }
}

/// Kernel init gain. The rectifier halves signal energy per layer and the
/// projection channels sit well below 1, so a plain 1/sqrt(in) init leaves
/// the local descriptors two orders of magnitude smaller than the
/// unit-sphere VLAD centers and the residuals barely see the input. This
/// gain keeps features near unit scale through two layers.
const KERNEL_INIT_GAIN: f64 = 4.0;

fn init_branch(config: &ModelConfig, rng: &mut ChaCha8Rng) -> BranchModel {
    let mut layers = Vec::with_capacity(config.bandwidths.len());
    for (idx, b) in config.bandwidths.iter().enumerate() {
        let (cin, cout) = (config.channels[idx], config.channels[idx + 1]);
        let gain = KERNEL_INIT_GAIN / (cin as f64).sqrt();
        let kernels = (0..cin * cout)
            .map(|_| {
                (0..*b)
                    .map(|l| rng.gen_range(-1.0..1.0) * gain / zonal_nu(l))
                    .collect()
            })
            .collect();
        layers.push(ConvLayer {
            bandwidth: *b,
            in_channels: cin,
            out_channels: cout,
            kernels,
            bias: vec![0.0; cout],
        });
    }

    let d = config.feature_dim();
    let centers = (0..config.clusters)
        .map(|_| {
            let mut c: Vec<f64> = (0..d).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let norm = c.iter().map(|v| v * v).sum::<f64>().sqrt().max(1e-12);
            c.iter_mut().for_each(|v| *v /= norm);
            c
        })
        .collect();
    let weights = (0..config.clusters)
        .map(|_| (0..d).map(|_| rng.gen_range(-0.5..0.5)).collect())
        .collect();
    let proj_gain = 1.0 / (config.vlad_dim() as f64).sqrt();
    let projection = (0..config.branch_dim)
        .map(|_| (0..config.vlad_dim()).map(|_| rng.gen_range(-proj_gain..proj_gain)).collect())
        .collect();

    BranchModel {
        layers,
        vlad: VladParams { centers, weights, biases: vec![0.0; config.clusters] },
        projection,
    }
}

/// Named spans of the canonical flat parameter vector; used by the gradient
/// checker, optimizer, and checkpoint manifest.
#[derive(Clone, Debug)]
pub struct ParamLayout {
    pub groups: Vec<(String, std::ops::Range<usize>, Vec<usize>)>,
    pub total: usize,
}

impl ParamLayout {
    pub fn new(config: &ModelConfig) -> ParamLayout {
        let mut groups = Vec::new();
        let mut at = 0usize;
        let mut push = |name: String, shape: Vec<usize>, at: &mut usize| {
            let count: usize = shape.iter().product();
            groups.push((name, *at..*at + count, shape));
            *at += count;
        };
        for b in 0..3usize {
            for (idx, bw) in config.bandwidths.iter().enumerate() {
                let (cin, cout) = (config.channels[idx], config.channels[idx + 1]);
                push(format!("branch{b}.layer{idx}.kernels"), vec![cin, cout, *bw], &mut at);
                push(format!("branch{b}.layer{idx}.bias"), vec![cout], &mut at);
            }
            let d = config.feature_dim();
            push(format!("branch{b}.vlad.centers"), vec![config.clusters, d], &mut at);
            push(format!("branch{b}.vlad.weights"), vec![config.clusters, d], &mut at);
            push(format!("branch{b}.vlad.bias"), vec![config.clusters], &mut at);
            push(format!("branch{b}.projection"), vec![config.branch_dim, config.vlad_dim()], &mut at);
        }
        ParamLayout { groups, total: at }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn same_seed_gives_identical_parameters() {
        let cfg = ModelConfig::tiny();
        let a = ModelParams::init(&cfg, 123).unwrap();
        let b = ModelParams::init(&cfg, 123).unwrap();
        assert_eq!(a, b);
        let c = ModelParams::init(&cfg, 124).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn zero_clusters_is_rejected_at_init() {
        let cfg = ModelConfig { clusters: 0, ..ModelConfig::tiny() };
        assert!(matches!(ModelParams::init(&cfg, 1), Err(EmbedError::InvalidConfig(_))));
    }

    #[test]
    fn kernel_tables_have_bandwidth_entries_per_channel_pair() {
        let cfg = ModelConfig::toy(64);
        let model = ModelParams::init(&cfg, 7).unwrap();
        let layer0 = &model.branches[0].layers[0];
        assert_eq!(layer0.kernels.len(), 2 * 8);
        assert!(layer0.kernels.iter().all(|k| k.len() == 32));
        let layer1 = &model.branches[0].layers[1];
        assert_eq!(layer1.kernels.len(), 8 * 16);
        assert!(layer1.kernels.iter().all(|k| k.len() == 16));
    }

    #[test]
    fn flatten_round_trips() {
        let cfg = ModelConfig::tiny();
        let model = ModelParams::init(&cfg, 99).unwrap();
        let flat = model.to_flat();
        assert_eq!(flat.len(), model.layout().total);
        let back = ModelParams::from_flat(&cfg, 99, &flat).unwrap();
        assert_eq!(back, model);
    }

    #[test]
    fn layout_groups_tile_the_flat_vector() {
        let layout = ParamLayout::new(&ModelConfig::tiny());
        let mut expected_start = 0;
        for (_, range, shape) in &layout.groups {
            assert_eq!(range.start, expected_start);
            assert_eq!(range.len(), shape.iter().product::<usize>());
            expected_start = range.end;
        }
        assert_eq!(expected_start, layout.total);
    }

    #[test]
    fn vlad_centers_start_on_the_unit_sphere() {
        let model = ModelParams::init(&ModelConfig::tiny(), 5).unwrap();
        for c in &model.branches[0].vlad.centers {
            let norm = c.iter().map(|v| v * v).sum::<f64>().sqrt();
            assert!((norm - 1.0).abs() < 1e-9);
        }
        assert!(model.branches[0].vlad.biases.iter().all(|b| *b == 0.0));
    }
}
