// Wire protocol types; numeric fields are seconds and degrees.

export type Vec3 = [number, number, number];

export interface DeviceDoc {
  id: number;
  name: string;
  position: Vec3;
  radius: number;
}

export interface SceneDoc {
  schema: string;
  name: string;
  approximation?: boolean;
  user: { eye_pos: Vec3; head_pos: Vec3; head_forward: Vec3 };
  devices: DeviceDoc[];
}

export interface SceneMsg {
  type: "scene";
  scene: SceneDoc;
  config: {
    technique: string;
    techniques: string[];
    gate_head: number;
    gate_gaze: number;
    seed: number;
    session_id: number;
  };
}

export interface TaskMsg {
  type: "task";
  target_id: number;
  name: string;
}

export interface PredictionMsg {
  type: "prediction";
  t: number;
  winner: number | null;
  stable: boolean;
  votes: Record<string, number>;
  scores: Record<string, number>;
  candidates: number[];
  predicted_gaze: { phi: number; theta: number };
}

export interface ResultMsg {
  type: "result";
  correct: boolean;
  dt: number | null;
  ct: number | null;
  st: number | null;
  error_count: number;
  target_id: number;
  final_winner: number | null;
}

export interface ErrorMsg {
  type: "error";
  code: string;
  message: string;
}

export type ServerMessage = SceneMsg | TaskMsg | PredictionMsg | ResultMsg | ErrorMsg;

export interface GazeOut {
  type: "gaze";
  t: number;
  phi: number;
  theta: number;
  head_yaw?: number;
}

export interface ConfirmOut {
  type: "confirm";
  t: number;
}

export interface SetTechniqueOut {
  type: "set_technique";
  name: string;
}

export interface SetSceneOut {
  type: "set_scene";
  name: string;
}

export type ClientMessage = { type: "hello"; scene?: string; seed?: number }
  | GazeOut
  | ConfirmOut
  | SetTechniqueOut
  | SetSceneOut;
