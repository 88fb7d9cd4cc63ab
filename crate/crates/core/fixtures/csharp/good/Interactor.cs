using UnityEngine;

public interface IInteractable
{
    string Prompt { get; }
    void Interact(GameObject by);
}

public class Interactor : MonoBehaviour
{
    [SerializeField] private float reach = 2f;
    [SerializeField] private KeyCode key = KeyCode.E;

    private IInteractable focus;

    private void Update()
    {
        focus = null;
        if (Physics.Raycast(transform.position, transform.forward, out RaycastHit hit, reach))
        {
            focus = hit.collider.GetComponent<IInteractable>();
        }
        if (focus != null && Input.GetKeyDown(key))
        {
            focus.Interact(gameObject);
        }
    }
}
