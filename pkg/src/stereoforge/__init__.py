"""stereoforge: pseudo-stereo pair synthesis, evaluation, and mixture planning.

The package turns single images plus depth maps into stereo training
pairs (right view, dense disparity, occlusion mask), scores disparity
predictions with the standard metrics, and ranks/mixes candidate
datasets for training.
"""

from .errors import (
    AllHoles,
    ArityMismatch,
    DimensionMismatch,
    EmptyPool,
    ExternalFailure,
    ImageTooSmall,
    KOutOfRange,
    MalformedHeader,
    MalformedPng,
    MissingMetric,
    NoOverlap,
    NoValidPixels,
    StereoForgeError,
    TruncatedPayload,
    UnfilledHoles,
    UnsupportedBitDepth,
    UnsupportedFormat,
)
from .fill import (
    FillConfig,
    fill_background_extend,
    fill_external,
    fill_holes,
    fill_random_texture,
)
from .imgio import (
    FloatMap,
    RasterImage,
    read_disp_png16,
    read_float_map,
    read_image,
    read_pfm,
    write_disp_png16,
    write_image,
    write_pfm,
)
from .metrics import (
    BENCHMARKS,
    EvalRecord,
    MeanResult,
    MetricReport,
    bad_tau,
    d1_all,
    dataset_mean,
    epe,
    evaluate_pair,
    half_resolution,
    mean_matches_reported,
    read_records_jsonl,
    write_records_jsonl,
)
from .mixing import (
    DatasetRef,
    MixPlan,
    RankedList,
    build_mix,
    draw_schedule,
    emit_manifest,
    parse_manifest,
    rank_datasets,
)
from .pipeline import (
    PipelineConfig,
    augment_crop,
    load_config,
    parse_list_file,
    resize_min_dims,
    run_batch,
    stable_seed,
    synth_pair,
    write_sample,
)
from .sgm import (
    CensusMap,
    CostVolume,
    MatchParams,
    build_cost_volume,
    census_transform,
    lr_check,
    match,
    sgm_aggregate,
    wta_disparity,
)
from .synth import (
    DepthMap,
    DispStats,
    DisparityMap,
    SynthConfig,
    depth_to_disparity,
    disparity_stats,
    emit_histogram_svg,
    sample_scale,
)
from .warp import StereoSample, WarpResult, assemble_sample, forward_warp, hole_mask_image

__version__ = "0.1.0"
