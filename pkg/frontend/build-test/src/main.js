/** Browser bootstrap: wire the controller to the page served by the review service. */
import { ApiClient } from "./api.js";
import { bindHotkeys, render } from "./render.js";
import { ReviewController } from "./state.js";
export function mount(root, api) {
    const controller = new ReviewController(api);
    const saved = typeof localStorage !== "undefined" ? localStorage.getItem("annotator_id") : null;
    if (saved)
        controller.annotatorId = saved;
    controller.onChange = () => {
        if (typeof localStorage !== "undefined") {
            localStorage.setItem("annotator_id", controller.annotatorId);
        }
        render(controller, root);
    };
    bindHotkeys(controller, root.ownerDocument);
    render(controller, root);
    void controller.load();
    return controller;
}
if (typeof document !== "undefined" && document.getElementById("app")) {
    const root = document.getElementById("app");
    window.emphstReview = mount(root, new ApiClient(""));
}
