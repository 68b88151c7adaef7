// Request and response shapes of the documented HTTP API. The server is the
// source of truth; these mirror its contract and carry no behavior.

export type TraversalKind = 'linear' | 'extrapolate' | 'circular' | 'slerp';
export type Sign = '+' | '-';

export interface SampleRequest {
  model_id: string;
  count?: number;
  seed?: number;
}

export interface EndpointSpec {
  latent_ids?: [string, string];
  seeds?: [number, number];
}

export interface TraverseRequest {
  model_id: string;
  kind: TraversalKind;
  endpoints: EndpointSpec;
  n?: number;
  grid_cols?: number;
  radius?: number;
}

export interface ArithmeticTerm {
  sign: Sign;
  anchor_set: string;
}

export interface ArithmeticRequest {
  model_id: string;
  terms: ArithmeticTerm[];
}

export interface AnchorCreateRequest {
  name: string;
  tags?: string[];
  latent_ids: string[];
  overwrite?: boolean;
}

export interface ModelSummary {
  model_id: string;
  input_dim: number;
  input_space: string;
  output_shape: number[];
  filename?: string;
  uploaded_at?: string;
}

export interface SampleResponse {
  latent_ids: string[];
  image_urls: string[];
}

export interface TraverseResponse {
  image_urls: string[];
  grid_url: string;
}

export interface ArithmeticResponse {
  result_latent_id: string;
  operand_image_urls: string[];
  result_image_url: string;
}

export interface AnchorSummary {
  name: string;
  tags: string[];
  size: number;
  created_at?: string;
}

export interface AnchorCreateResponse {
  name: string;
  tags: string[];
  size: number;
}

export interface ErrorEnvelope {
  code: string;
  message: string;
  detail?: unknown;
}
