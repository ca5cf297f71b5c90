/** Wire types of the patchmotion HTTP service. */

export interface BindingPairJson {
  target: string;
  source: string;
  alignment?: number[][];
}

export interface BindingJson {
  pairs: BindingPairJson[];
  bind_root_velocity: boolean;
}

export interface TransferConfigJson {
  alpha: number;
  patch_size: number;
  step: number;
  iterations: number;
  pyramid_levels: number;
  feature_mode: "rotation6d" | "local_position" | "velocity";
  seed: number;
  normalize: boolean;
  keyframe_mask: boolean[] | null;
}

export interface SkeletonBlock {
  joints: string[];
  parents: number[];
  frames: number;
  frame_time: number;
}

export interface SessionSummary {
  id: string;
  source: SkeletonBlock | null;
  target: SkeletonBlock | null;
  n_targets: number;
  bindings: BindingJson | null;
  config: TransferConfigJson;
  has_result: boolean;
}

export interface Proposal {
  pairs: BindingPairJson[];
  score: number;
}

export interface TransferJob {
  job: string;
  status: string;
  energy: number[];
  frames: number;
}

/** One playback panel: FK world positions per frame, (frames, joints, 3). */
export interface PositionsBlock {
  joints: string[];
  frame_time: number;
  frames: number[][][];
}

export interface FramesFeed {
  from: number;
  to: number;
  source: PositionsBlock;
  result: PositionsBlock;
  target: PositionsBlock;
}

export interface MetricsReport {
  fid: number | null;
  freq_align: number;
  binding_rate: number;
  energy: number[];
}
