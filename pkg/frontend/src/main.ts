import { ServiceClient } from "./api.js";
import { App } from "./ui.js";

const root = document.getElementById("app");
if (root) {
  const app = new App(new ServiceClient(), root);
  void app.start();
}
